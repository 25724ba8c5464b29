// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "satrs/channel.hpp"
#include "satrs/rates.hpp"
#include "satrs/subproblem.hpp"

namespace satrs {

/// Everything one AO run consumes, precomputed once per trial: effective
/// channels of the realization set, of the estimate and of the true channel,
/// plus the power model. `stage` carries the stage and (two-stage) W and R.
struct AoInput {
  PrecoderSet stage;
  std::vector<EffectiveChannel> samples;
  std::vector<VectorXd> sample_noise;
  EffectiveChannel estimate;
  EffectiveChannel truth;
  VectorXd truth_noise;
  PowerModel power;
};

/// One-stage when `stage_template.stage` is one_stage (the realization set
/// uses the sampled feeder matrices); otherwise the realization set pairs the
/// fixed R F_hat W with the user-link samples. Under perfect CSIT the
/// identical samples collapse to one.
AoInput make_ao_input(const ChannelDraw& draw, const Scenario& s, const PrecoderSet& stage_template);

/// Dominant left singular vector of the estimated effective channels of each
/// stream's intended users, scaled by one common factor so the tightest feed
/// meets its limit.
PrecoderSet initialize_precoders(const AoInput& in, const Scenario& s, Strategy strategy);

struct AoOptions {
  double tol = 1e-4;
  int max_iter = 300;
  int stall_iterations = 2;
  SolverOptions solver;
};

struct AoTrace {
  std::vector<double> objective;     ///< W^[n], n >= 1 (W^[0] = 0 implicit)
  std::vector<double> power_excess;  ///< max_n usage_n - P_n per iterate
  int iterations = 0;
  bool converged = false;
  PrecoderSet precoders;
  SubproblemResult final;
  double saa_objective = 0.0;
  RateReport saa;       ///< group rates from the SAA-average per-user rates
  RateReport realized;  ///< true-channel rates, max-min common split
};

/// Alternates (equalizers, weights) and the convex precoder update from the
/// initialization until |W^[n] - W^[n-1]| <= tol holds for
/// `stall_iterations` consecutive iterations.
AoTrace run_ao(const AoInput& in, const Scenario& s, Strategy strategy, const AoOptions& opt = {});
/// Same from a caller-supplied starting point.
AoTrace run_ao(const AoInput& in, const Scenario& s, const PrecoderSet& start, const AoOptions& opt);

/// CSV "iteration,objective,power_excess".
void write_trace_csv(std::ostream& os, const AoTrace& t);

}  // namespace satrs
