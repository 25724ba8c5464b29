// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "satrs/rates.hpp"
#include "satrs/scenario.hpp"
#include "satrs/types.hpp"

namespace satrs {

inline constexpr double kWeightMin = 1.0;
inline constexpr double kWeightMax = 1e12;
inline constexpr double kMmseFloor = 1e-12;

/// Received-power decomposition and MMSE quantities of one user under one
/// channel realization.
struct UserMmse {
  double total_c = 0.0;  ///< T_c: every stream plus noise
  double total = 0.0;    ///< T = T_c - |hbar^H p_c|^2
  double interf_c = 0.0; ///< I_c = T_c - |hbar^H p_c|^2
  double interf = 0.0;   ///< I = T - |hbar^H p_mu(k)|^2
  cplx a_c{0.0, 0.0};    ///< hbar_own^H p_c,own
  cplx a{0.0, 0.0};      ///< hbar_own^H p_mu(k)
  cplx g_c{0.0, 0.0};    ///< common MMSE equalizer p_c^H hbar / T_c
  cplx g{0.0, 0.0};      ///< private MMSE equalizer p^H hbar / T
  double eps_c = 1.0;    ///< I_c / T_c
  double eps = 1.0;      ///< I / T
};

/// Equalizers and MMSEs of user k. For NoRS the common fields stay at their
/// zero-stream values (g_c = 0, eps_c = 1).
UserMmse user_mmse(const EffectiveChannel& hbar, double noise, const PrecoderSet& p,
                   const Scenario& s, int k);

/// MSE |g|^2 T - 2 Re(g a) + 1 of an arbitrary scalar equalizer.
double mse(cplx g, double total, cplx a);

/// u = 1/eps with eps floored at 1e-12 and u clamped to [1, 1e12].
/// Throws Error(nonpositive_mmse) for eps <= 0 or NaN. `clamped` is set when
/// either guard fired.
double optimal_weight(double eps, bool* clamped = nullptr);

/// Augmented WMSE u eps - log2(u).
double augmented_wmse(double u, double eps);

/// Sample-average aggregates for user k; the common set is empty for NoRS.
/// psi[j] multiplies the streams sent by gateway j.
struct SafUser {
  double t = 0.0;
  std::vector<MatrixXcd> psi;
  VectorXcd f;            ///< length |B_own|
  double v = 0.0;         ///< mean log2 u
  double u = 0.0;         ///< mean u
  double noise = 0.0;     ///< mean of t * sigma_bar^2
  double xi = 0.0;        ///< mean xi at the current precoders
  double rate = 0.0;      ///< mean rate at the current precoders
};

struct SafTerms {
  std::vector<SafUser> common;  ///< per user (RS only)
  std::vector<SafUser> priv;    ///< per user
  int samples = 0;
  int clamped = 0;              ///< count of weights hitting a guard
};

/// Per-sample MMSE equalizers and weights at precoders p, reduced into the
/// SAF aggregates.
SafTerms build_saf_terms(const std::vector<EffectiveChannel>& samples,
                         const std::vector<VectorXd>& noise, const PrecoderSet& p,
                         const Scenario& s);

/// Quadratic-form expression sum p^H Psi p + noise - 2 Re(f^H p_own) + u - v
/// for the private stream of user k.
double private_wmse_expression(const SafTerms& saf, const PrecoderSet& p, const Scenario& s, int k);
/// Same for the common stream of user k (every stream counted).
double common_wmse_expression(const SafTerms& saf, const PrecoderSet& p, const Scenario& s, int k);

}  // namespace satrs
