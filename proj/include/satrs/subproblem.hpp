// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "satrs/conic.hpp"
#include "satrs/rates.hpp"
#include "satrs/scenario.hpp"
#include "satrs/wmmse.hpp"

namespace satrs {

/// Per-feed power model seen by the precoder update: the feeder matrix that
/// maps the optimized vectors to antenna signals (F_hat, or R F_hat W for the
/// second stage) and the fixed feeder-noise floor per global feed.
struct PowerModel {
  BlockMatrix feeder;
  VectorXd noise_floor;
};

PowerModel make_power_model(const BlockMatrix& feeder_estimate, const PrecoderSet& stage_template,
                            const Scenario& s);

/// Offsets of each variable group inside the real variable vector. Precoders
/// are stored as [Re; Im] at their offsets.
struct ProgramLayout {
  Strategy strategy = Strategy::rs;
  std::vector<int> common;  ///< per gateway (RS only)
  std::vector<int> priv;    ///< per group
  int rg = 0;
  int r = 0;                ///< first of M group rates
  int c = -1;               ///< first of M portions (RS only)
};

struct Subproblem {
  ConicProgram program;
  ProgramLayout layout;
};

/// Convex precoder update at fixed equalizers and weights:
/// maximize r_g subject to r_g <= C_m + r_m, r_m <= 1 - xi_i(p) for i in
/// group m, sum_{i in cluster l} C_i <= 1 - xi_c,k(p) for k served by l,
/// C_m >= 0 and per-feed power. NoRS drops every common variable.
Subproblem build_program(const SafTerms& saf, const PowerModel& power, const Scenario& s,
                         Strategy strategy);

/// Power constraints only, with a free objective; used by oracles and tests.
std::vector<QuadraticConstraint> power_constraints(const PowerModel& power, const Scenario& s,
                                                   const ProgramLayout& layout, int num_vars);

struct SubproblemResult {
  PrecoderSet precoders;
  double objective = 0.0;  ///< r_g
  VectorXd group_rate;     ///< r_m
  VectorXd portions;       ///< C_m (zero for NoRS)
  ConicSolution solution;
};

/// Reads the precoders and auxiliaries out of a real variable vector.
SubproblemResult extract(const Subproblem& sp, const VectorXd& x, const PrecoderSet& stage_template,
                         const Scenario& s);

/// Solves and extracts; throws Error(infeasible) or Error(max_iter) when the
/// backend fails to certify optimality.
SubproblemResult solve_subproblem(const Subproblem& sp, const PrecoderSet& stage_template,
                                  const Scenario& s, const SolverOptions& opt = {});

/// Real variable vector of a precoder set under the given layout, with the
/// auxiliaries set to zero.
VectorXd pack_precoders(const ProgramLayout& layout, const PrecoderSet& p, int num_vars);

}  // namespace satrs
