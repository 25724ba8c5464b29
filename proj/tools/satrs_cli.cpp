// SPDX-License-Identifier: Apache-2.0
// Command-line driver: solve, sweep, reproduce, dump-channels, validate.
#include <atomic>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "satrs/ao.hpp"
#include "satrs/channel.hpp"
#include "satrs/error.hpp"
#include "satrs/harness.hpp"
#include "satrs/io.hpp"
#include "satrs/obp.hpp"
#include "satrs/rates.hpp"
#include "satrs/rng.hpp"
#include "satrs/wmmse.hpp"

using namespace satrs;

namespace {

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> samples;
  std::string out;
  bool perfect_csit = false;
  int threads = 0;
};

nlohmann::json scenario_json(const Common& c) {
  nlohmann::json j = c.config.empty() ? nlohmann::json::object() : read_json_file(c.config);
  if (c.seed) j["seed"] = *c.seed;
  if (c.samples) j["samples"] = *c.samples;
  if (c.perfect_csit) j["perfect_csit"] = true;
  return j;
}

void apply_overrides(ExperimentSpec& spec, const Common& c) {
  if (c.seed) spec.seed = *c.seed;
  if (c.trials) spec.trials = *c.trials;
  if (c.samples) spec.samples = *c.samples;
  if (c.perfect_csit) spec.perfect_csit = true;
  if (!c.out.empty()) spec.out = c.out;
  if (c.threads > 0) spec.threads = c.threads;
  validate(spec);
}

int emit_sweep(const ExperimentSpec& spec) {
  std::signal(SIGINT, on_sigint);
  const SweepResult res = run_sweep(
      spec, [](int done, int total) { spdlog::info("sweep: {}/{} trials", done, total); }, &g_cancel);
  std::ostringstream csv;
  write_sweep_csv(csv, res.rows);
  if (spec.out.empty())
    std::cout << csv.str();
  else
    write_text_file(spec.out, csv.str());
  int failures = 0;
  for (const auto& r : res.rows) failures += r.failures;
  if (failures) spdlog::warn("{} trial runs failed; see the log", failures);
  if (!res.complete) {
    spdlog::warn("interrupted: partial results written for completed sweep points");
    return 130;
  }
  return 0;
}

int cmd_solve(const Common& c, const std::string& scheme_name, bool obp, std::uint64_t trial,
              const std::string& trace_out) {
  const Scenario s = build_scenario(scenario_json(c));
  Scheme scheme = parse_scheme(scheme_name);
  scheme.obp = scheme.obp || obp;
  const auto outcomes = run_trial(s, trial, {scheme});
  const TrialOutcome& o = outcomes.front();
  nlohmann::json j;
  j["scheme"] = o.scheme.name();
  j["trial"] = o.trial;
  j["ok"] = o.ok;
  if (!o.ok) j["error"] = o.error;
  j["mmf_realized"] = o.mmf;
  j["saa_objective"] = o.saa_objective;
  j["ao_objective"] = o.ao_objective;
  j["nors_embedded"] = o.nors_embedded;
  j["iterations"] = o.iterations;
  j["converged"] = o.converged;
  j["monotone"] = o.monotone;
  j["max_power_excess"] = o.max_power_excess;
  j["violations"] = o.violations;
  j["wall_ms"] = o.wall_ms;
  if (o.scheme.obp) {
    j["first_stage_iterations"] = o.first_stage_iterations;
    j["first_stage_mse"] = o.first_stage_mse;
  }
  j["ao_trace"] = o.ao_trace;
  std::cout << j.dump(2) << "\n";
  if (!trace_out.empty()) {
    std::ostringstream os;
    os << "iteration,objective\n";
    for (std::size_t i = 0; i < o.ao_trace.size(); ++i) os << (i + 1) << "," << fmt::format("{:.12g}", o.ao_trace[i]) << "\n";
    write_text_file(trace_out, os.str());
  }
  return o.ok ? 0 : 1;
}

int cmd_dump(const Common& c, std::uint64_t trial) {
  const Scenario s = build_scenario(scenario_json(c));
  const ChannelDraw d = make_channel_draw(s, trial);
  std::ostringstream os;
  write_channel_dump(os, s, d);
  if (c.out.empty())
    std::cout << os.str();
  else
    write_text_file(c.out, os.str());
  return 0;
}

// Quick invariant checks on the configured scenario; prints one line each.
int cmd_validate(const Common& c) {
  const Scenario s = build_scenario(scenario_json(c));
  int failed = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "  " << detail << "\n";
    if (!ok) ++failed;
  };
  report("scenario", true, fmt::format("{} feeds, {} gateways, {} groups, {} users", s.feeds, s.gateways(),
                                       s.groups(), s.users()));

  const ChannelDraw d = make_channel_draw(s, 0);
  const AoInput in = make_ao_input(d, s, PrecoderSet{});
  Rng rng = make_stream(s.seed, 0, StreamPurpose::test);
  PrecoderSet p = initialize_precoders(in, s, Strategy::rs);
  for (auto& v : p.common) v = complex_normal_matrix(rng, v.size(), 1, 1.0);
  for (auto& v : p.priv) v = complex_normal_matrix(rng, v.size(), 1, 1.0);
  const RateReport rr = sinr_and_rates(in.estimate, in.sample_noise.front(), p, s);
  double worst = 0.0;
  for (int k = 0; k < s.users(); ++k) {
    const UserMmse m = user_mmse(in.estimate, in.sample_noise.front()(k), p, s, k);
    worst = std::max(worst, std::abs(augmented_wmse(optimal_weight(m.eps), m.eps) - (1.0 - rr.private_rate(k))));
    worst = std::max(worst, std::abs(augmented_wmse(optimal_weight(m.eps_c), m.eps_c) - (1.0 - rr.common_rate(k))));
  }
  report("rate-wmmse identity", worst <= 1e-9, fmt::format("max |xi - (1 - R)| = {:.3e}", worst));

  PrecoderSet zero = p;
  for (auto& v : zero.common) v.setZero();
  PrecoderSet nors = p;
  nors.strategy = Strategy::nors;
  nors.common.clear();
  const RateReport a = sinr_and_rates(in.estimate, in.sample_noise.front(), zero, s);
  const RateReport b = sinr_and_rates(in.estimate, in.sample_noise.front(), nors, s);
  report("zero common power reproduces NoRS", a.private_rate == b.private_rate, "private rates compared bitwise");

  if (!s.perfect_csit || s.delta > 0.0) {
    const FirstStageResult fs = run_first_stage(d.feeder_estimate, s, d.sigma_e2, random_first_stage(s, s.seed, 0));
    bool mono = true;
    for (std::size_t i = 1; i < fs.mse_trace.size(); ++i) mono = mono && fs.mse_trace[i] <= fs.mse_trace[i - 1] + 1e-9;
    report("first stage", fs.converged && mono,
           fmt::format("{} iterations, final MSE {:.6g}, monotone {}", fs.iterations, fs.mse_trace.back(), mono));
  }

  const AoTrace tr = run_ao(in, s, Strategy::rs);
  double excess = -std::numeric_limits<double>::infinity();
  bool mono = true;
  for (std::size_t i = 0; i < tr.objective.size(); ++i) {
    excess = std::max(excess, tr.power_excess[i]);
    if (i && tr.objective[i] < tr.objective[i - 1] - 1e-9) mono = false;
  }
  report("AO (RS, trial 0)", tr.converged && mono && excess <= 1e-6,
         fmt::format("{} iterations, objective {:.6g}, max power excess {:.3e}", tr.iterations, tr.saa_objective,
                     excess));
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-splitting precoding for multibeam satellite links with feeder interference"};
  app.require_subcommand(1);
  Common c;
  std::string level = "warn";
  app.add_option("--log-level", level, "trace|debug|info|warn|error")->capture_default_str();

  auto add_common = [&](CLI::App* sub, bool with_trials) {
    sub->add_option("--config", c.config, "scenario JSON file");
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--samples", c.samples, "SAA samples S");
    sub->add_option("--out", c.out, "output path (stdout when empty)");
    sub->add_flag("--perfect-csit", c.perfect_csit, "use the true channel at the transmitter");
    if (with_trials) {
      sub->add_option("--trials", c.trials, "Monte-Carlo trials per sweep point");
      sub->add_option("--threads", c.threads, "worker threads (0: hardware concurrency)");
    }
  };

  std::string scheme = "RS";
  bool obp = false;
  std::uint64_t trial = 0;
  std::string trace_out;
  auto* solve = app.add_subcommand("solve", "run one scheme on one channel draw and print the result");
  add_common(solve, false);
  solve->add_option("--scheme", scheme, "RS|NoRS|RS+OBP|NoRS+OBP")->capture_default_str();
  solve->add_flag("--obp", obp, "use the two-stage design with on-board processing");
  solve->add_option("--trial", trial, "trial index of the channel draw")->capture_default_str();
  solve->add_option("--trace", trace_out, "write the AO objective trace CSV here");

  std::string spec_file;
  std::vector<std::string> schemes;
  auto* sweep = app.add_subcommand("sweep", "run an experiment file and write the CSV");
  add_common(sweep, true);
  sweep->add_option("spec", spec_file, "experiment JSON file")->required();
  sweep->add_option("--scheme", schemes, "restrict to these schemes");

  std::string preset_name;
  auto* reproduce = app.add_subcommand("reproduce", "run a preset sweep (fig3|fig4|fig5|fig6|grouping)");
  add_common(reproduce, true);
  reproduce->add_option("preset", preset_name, "preset name")->required();
  reproduce->add_option("--scheme", schemes, "restrict to these schemes");

  auto* dump = app.add_subcommand("dump-channels", "write one channel draw as text");
  add_common(dump, false);
  dump->add_option("--trial", trial, "trial index")->capture_default_str();

  auto* val = app.add_subcommand("validate", "run quick invariant checks on a scenario");
  add_common(val, false);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(spdlog::stderr_color_mt("satrs"));
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    if (*solve) return cmd_solve(c, scheme, obp, trial, trace_out);
    if (*dump) return cmd_dump(c, trial);
    if (*val) return cmd_validate(c);
    ExperimentSpec spec;
    if (*sweep) {
      spec = load_experiment(spec_file);
    } else {
      spec = preset(preset_name);
      if (!c.config.empty()) {
        nlohmann::json base = read_json_file(c.config);
        base.update(spec.scenario);
        spec.scenario = base;
      }
    }
    if (!schemes.empty()) {
      spec.schemes.clear();
      for (const auto& n : schemes) spec.schemes.push_back(parse_scheme(n));
    }
    apply_overrides(spec, c);
    return emit_sweep(spec);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
