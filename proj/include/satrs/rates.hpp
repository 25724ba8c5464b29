// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "satrs/scenario.hpp"
#include "satrs/types.hpp"

namespace satrs {

enum class Strategy { rs, nors };
enum class Stage { one_stage, two_stage };

std::string_view to_string(Strategy s);
std::string_view to_string(Stage s);

/// Precoders of every stream. In two-stage mode `common`/`priv` hold the
/// second-stage vectors v and `first_stage`/`obp_filter` hold W and R; the
/// transmitted precoder is then W v. In one-stage mode W and R are identity
/// and are left empty.
struct PrecoderSet {
  Strategy strategy = Strategy::rs;
  Stage stage = Stage::one_stage;
  std::vector<VectorXcd> common;  ///< per gateway, length B_l; empty for NoRS
  std::vector<VectorXcd> priv;    ///< per group, length B_lambda(m)
  MatrixPerCluster first_stage;   ///< W_l
  MatrixPerCluster obp_filter;    ///< R_l

  bool has_common() const { return strategy == Strategy::rs; }
};

/// Checks dimensions and strategy consistency against the scenario.
void check_precoders(const PrecoderSet& p, const Scenario& s);

struct RateReport {
  VectorXd common_sinr;           ///< gamma_c,k (zero for NoRS)
  VectorXd private_sinr;          ///< gamma_k
  VectorXd common_rate;           ///< R_c,k
  VectorXd private_rate;          ///< R_k
  VectorXd cluster_common_rate;   ///< R_c,l = min over the cluster's users
  VectorXd group_private_rate;    ///< r_m = min over the group's users
  VectorXd portions;              ///< C_m
  VectorXd group_rate;            ///< r_g,m
  VectorXd effective_noise;       ///< sigma_bar^2_n,k
  double mmf = 0.0;               ///< min_m r_g,m
};

/// F_bar_{i,l} = R_i F_{i,l} W_l. Empty R or W mean identity.
BlockMatrix effective_feeder(const BlockMatrix& f, const MatrixPerCluster& r,
                             const MatrixPerCluster& w);

/// hbar^H_{j,k} = sum_l h^H_{l,k} R_l F_{l,j} W_j, stored as hbar_{j,k} columns.
EffectiveChannel effective_channel(const UserLinkBlocks& h, const BlockMatrix& f,
                                   const MatrixPerCluster& r = {},
                                   const MatrixPerCluster& w = {});

/// sigma_n^2 sum_l |h^H_{l,k} R_l|^2 + sigma_n^2 per user.
VectorXd effective_noise(const UserLinkBlocks& h, const MatrixPerCluster& r, double sigma2);

/// SINRs and rates from their direct interference-sum definitions. With
/// `portions` the group rate is C_m + r_m; without, the cluster common rate is
/// split max-min fairly over the cluster's groups.
RateReport sinr_and_rates(const EffectiveChannel& hbar, const VectorXd& noise,
                          const PrecoderSet& p, const Scenario& s,
                          const std::optional<VectorXd>& portions = std::nullopt);

struct AverageRates {
  VectorXd common;  ///< average R_c,k over the realization set
  VectorXd priv;    ///< average R_k
};

/// Arithmetic mean over the realization set of the per-sample rates.
AverageRates saa_average_rates(const std::vector<EffectiveChannel>& samples,
                               const std::vector<VectorXd>& noise, const PrecoderSet& p,
                               const Scenario& s);

/// Group rates and MMF from per-user rates (shared min/split logic).
RateReport aggregate_group_rates(const VectorXd& common_rate, const VectorXd& private_rate,
                                 const PrecoderSet& p, const Scenario& s,
                                 const std::optional<VectorXd>& portions = std::nullopt);

/// Max-min split of each cluster's common rate over its groups.
VectorXd split_common_rate(const VectorXd& cluster_common_rate, const VectorXd& group_private_rate,
                           const Scenario& s);

/// Per-feed satellite transmit power, indexed by global feed id. `feeder` is
/// the estimate F_hat for one-stage precoders or F_bar_hat = R F_hat W for
/// two-stage ones; the feeder-noise floor is sigma_n^2 [R_l R_l^H]_ff
/// (sigma_n^2 when R is identity).
VectorXd antenna_power_usage(const PrecoderSet& p, const BlockMatrix& feeder, const Scenario& s);

/// Per-feed noise floor only (zero precoders).
VectorXd feeder_noise_floor(const PrecoderSet& p, const Scenario& s);

}  // namespace satrs
