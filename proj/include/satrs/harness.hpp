// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "satrs/ao.hpp"
#include "satrs/obp.hpp"
#include "satrs/rates.hpp"
#include "satrs/scenario.hpp"

namespace satrs {

struct Scheme {
  Strategy strategy = Strategy::rs;
  bool obp = false;

  std::string name() const;  ///< "RS", "NoRS", "RS+OBP", "NoRS+OBP"
  bool operator==(const Scheme&) const = default;
};

Scheme parse_scheme(const std::string& name);
std::vector<Scheme> all_schemes();

struct TrialOutcome {
  Scheme scheme;
  std::uint64_t trial = 0;
  bool ok = false;
  std::string error;

  double mmf = 0.0;            ///< realized true-channel MMF rate
  double saa_objective = 0.0;  ///< optimizer objective of the reported precoders
  double ao_objective = 0.0;   ///< AO objective before candidate selection
  bool nors_embedded = false;  ///< RS reported the NoRS point (zero common power)
  int iterations = 0;
  bool converged = false;
  bool monotone = true;        ///< objective non-decreasing up to 1e-9
  double max_power_excess = 0.0;
  int violations = 0;          ///< iterates with usage > P_n + 1e-6
  double wall_ms = 0.0;
  int first_stage_iterations = 0;
  double first_stage_mse = 0.0;
  std::vector<double> ao_trace;
  PrecoderSet precoders;       ///< reported solution
};

/// Draws trial `trial`, runs the first stage once when any requested scheme
/// uses OBP, and runs AO for every scheme on the same draw. RS reports the
/// better (by SAA objective) of its own AO result and the NoRS solution
/// embedded with zero common power, so NoRS is always computed alongside RS.
/// Failures are recorded in the outcome, not thrown.
std::vector<TrialOutcome> run_trial(const Scenario& s, std::uint64_t trial,
                                    const std::vector<Scheme>& schemes, const AoOptions& ao = {});

enum class SweepVar { none, per_feed_power, delta, alpha, users_per_group, group_sizes };
std::string to_string(SweepVar v);
SweepVar parse_sweep_var(const std::string& name);

struct ExperimentSpec {
  nlohmann::json scenario = nlohmann::json::object();
  std::vector<Scheme> schemes = all_schemes();
  SweepVar var = SweepVar::none;
  std::vector<double> values;                   ///< numeric sweeps
  std::vector<std::vector<int>> group_sets;     ///< group_sizes sweep
  int trials = 10;
  int samples = 50;
  std::uint64_t seed = 1;
  std::optional<bool> perfect_csit;
  std::string out;
  int threads = 0;                              ///< 0: hardware concurrency
  AoOptions ao;

  int points() const;
  std::string value_label(int point) const;
  /// Scenario of sweep point `point` with samples, seed and CSIT applied.
  Scenario scenario_at(int point) const;
};

/// Throws Error(invalid_config) when trials < 1 or sweep values are not
/// finite or not sorted.
void validate(const ExperimentSpec& spec);

ExperimentSpec parse_experiment(const nlohmann::json& j);

struct SweepRow {
  std::string sweep_var;
  std::string sweep_value;
  Scheme scheme;
  int trials = 0;
  int samples = 0;
  double mmf_mean = 0.0;
  double mmf_stderr = 0.0;
  double saa_obj_mean = 0.0;
  double saa_obj_stderr = 0.0;
  double iters_mean = 0.0;
  double wall_ms_mean = 0.0;
  int violations = 0;
  int failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// outcomes[point][trial][scheme index in spec.schemes]
  std::vector<std::vector<std::vector<TrialOutcome>>> outcomes;
  bool complete = true;  ///< false when cancelled; rows then cover finished points only
};

using ProgressFn = std::function<void(int done, int total)>;

/// Runs every (point, trial) pair on a worker pool; results are reduced in
/// point, trial, scheme order so the output does not depend on scheduling.
/// Tasks are handed out in point-major order; once `cancel` is set no new
/// task starts and rows are emitted only for points whose trials all ran.
SweepResult run_sweep(const ExperimentSpec& spec, const ProgressFn& progress = {},
                      const std::atomic<bool>* cancel = nullptr);

/// Mean and standard error (sample standard deviation / sqrt(n); 0 for n < 2).
std::pair<double, double> mean_stderr(const std::vector<double>& v);

/// Fixed columns: sweep_var, sweep_value, scheme, obp, trials, S, mmf_mean,
/// mmf_stderr, saa_obj_mean, iters_mean, wall_ms_mean, violations.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool include_timing = true);

/// Preset experiments: fig3 (per-feed power), fig4 (delta), fig5 (alpha),
/// fig6 (users per group) and grouping (power sweep with group sizes
/// 1,1,1,2,2,2,3,3,3).
ExperimentSpec preset(const std::string& name);

}  // namespace satrs
