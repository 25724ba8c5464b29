// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "satrs/rates.hpp"
#include "satrs/scenario.hpp"
#include "satrs/types.hpp"

namespace satrs {

struct MseReport {
  VectorXd per_receiver;  ///< MSE_l
  double total = 0.0;
};

/// Robust sum-MSE of the feeder-link interference channel with transmit
/// filters W, receive filters R and estimate F_hat (block (l, i) = receiver
/// l, transmitter i). The error term is sigma_e2 Tr(R_l R_l^H) sum_i Tr(W_i W_i^H).
MseReport sum_mse(const MatrixPerCluster& w, const MatrixPerCluster& r, const BlockMatrix& f,
                  double sigma_n2, double sigma_e2);

/// Exact minimizer of sum_mse over R for fixed W:
/// R_l = W_l^H F_ll^H (sum_i F_li W_i W_i^H F_li^H + (sigma_n2 + sigma_e2 sum_i Tr(W_i W_i^H)) I)^-1.
MatrixPerCluster update_R(const MatrixPerCluster& w, const BlockMatrix& f, double sigma_n2,
                          double sigma_e2);

/// Exact minimizer of sum_mse over W for fixed R:
/// W_l = (sum_i F_il^H R_i^H R_i F_il + sigma_e2 Tr(sum_i R_i^H R_i) I)^-1 F_ll^H R_l^H.
/// A 1e-12 I jitter is added when the bracket is singular.
MatrixPerCluster update_W(const MatrixPerCluster& r, const BlockMatrix& f, double sigma_e2);

struct FirstStageOptions {
  double tol = 1e-4;
  int max_iter = 500;
};

struct FirstStageResult {
  MatrixPerCluster w;
  MatrixPerCluster r;
  std::vector<double> mse_trace;  ///< after each half-step, starting at the R update
  int iterations = 0;
  bool converged = false;
  BlockMatrix effective;          ///< R_i F_hat_il W_l

  /// Two-stage precoder template carrying W and R.
  PrecoderSet stage_template(Strategy strategy) const;
};

/// CN(0, 1) initial W per gateway from the given stream.
MatrixPerCluster random_first_stage(const Scenario& s, std::uint64_t seed, std::uint64_t trial);

/// Alternates update_R and update_W until successive full-iteration sum-MSE
/// values differ by at most tol. Throws Error(max_iter) when the tolerance is
/// not met.
FirstStageResult run_first_stage(const BlockMatrix& f_hat, const Scenario& s, double sigma_e2,
                                 const MatrixPerCluster& w0, const FirstStageOptions& opt = {});

}  // namespace satrs
