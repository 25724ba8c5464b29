// SPDX-License-Identifier: Apache-2.0
#include "satrs/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "satrs/error.hpp"

namespace satrs {

std::string_view to_string(Strategy s) { return s == Strategy::rs ? "RS" : "NoRS"; }
std::string_view to_string(Stage s) { return s == Stage::one_stage ? "one-stage" : "two-stage"; }

void check_precoders(const PrecoderSet& p, const Scenario& s) {
  const int L = s.gateways();
  if (p.has_common()) {
    if (static_cast<int>(p.common.size()) != L)
      throw Error(ErrorCode::mode_mismatch, "RS precoders need one common stream per gateway");
    for (int l = 0; l < L; ++l)
      if (p.common[l].size() != s.cluster_size(l))
        throw Error(ErrorCode::dimension_mismatch, "common precoder length differs from |B_l|");
  } else if (!p.common.empty()) {
    throw Error(ErrorCode::mode_mismatch, "NoRS precoders carry no common stream");
  }
  if (static_cast<int>(p.priv.size()) != s.groups())
    throw Error(ErrorCode::dimension_mismatch, "one private precoder per group");
  for (int m = 0; m < s.groups(); ++m)
    if (p.priv[m].size() != s.cluster_size(s.group_to_gateway[m]))
      throw Error(ErrorCode::dimension_mismatch, "private precoder length differs from |B_lambda(m)|");
  if (p.stage == Stage::two_stage) {
    if (static_cast<int>(p.first_stage.size()) != L || static_cast<int>(p.obp_filter.size()) != L)
      throw Error(ErrorCode::mode_mismatch, "two-stage precoders need W and R per gateway");
  } else if (!p.first_stage.empty() || !p.obp_filter.empty()) {
    throw Error(ErrorCode::mode_mismatch, "one-stage precoders carry no W or R");
  }
}

BlockMatrix effective_feeder(const BlockMatrix& f, const MatrixPerCluster& r,
                             const MatrixPerCluster& w) {
  const std::size_t L = f.clusters();
  if ((!r.empty() && r.size() != L) || (!w.empty() && w.size() != L))
    throw Error(ErrorCode::dimension_mismatch, "R and W need one block per gateway");
  BlockMatrix out(L);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      MatrixXcd b = f.at(i, l);
      if (!r.empty()) b = r[i] * b;
      if (!w.empty()) b = b * w[l];
      out.at(i, l) = std::move(b);
    }
  }
  return out;
}

EffectiveChannel effective_channel(const UserLinkBlocks& h, const BlockMatrix& f,
                                   const MatrixPerCluster& r, const MatrixPerCluster& w) {
  const std::size_t L = f.clusters();
  if (h.size() != L) throw Error(ErrorCode::dimension_mismatch, "user link needs one block per cluster");
  const BlockMatrix fbar = effective_feeder(f, r, w);
  EffectiveChannel out(L);
  for (std::size_t j = 0; j < L; ++j) {
    out[j] = fbar.at(0, j).adjoint() * h[0];
    for (std::size_t l = 1; l < L; ++l) out[j] += fbar.at(l, j).adjoint() * h[l];
  }
  return out;
}

VectorXd effective_noise(const UserLinkBlocks& h, const MatrixPerCluster& r, double sigma2) {
  if (h.empty()) throw Error(ErrorCode::dimension_mismatch, "empty user link");
  if (!r.empty() && r.size() != h.size())
    throw Error(ErrorCode::dimension_mismatch, "R needs one block per cluster");
  const Eigen::Index K = h[0].cols();
  VectorXd out = VectorXd::Ones(K);
  for (std::size_t l = 0; l < h.size(); ++l) {
    // |h^H R|^2 per column: squared norms of the columns of R^H h.
    if (r.empty())
      out += h[l].colwise().squaredNorm().transpose();
    else
      out += (r[l].adjoint() * h[l]).colwise().squaredNorm().transpose();
  }
  return sigma2 * out;
}

VectorXd split_common_rate(const VectorXd& cluster_common_rate, const VectorXd& group_private_rate,
                           const Scenario& s) {
  VectorXd portions = VectorXd::Zero(s.groups());
  for (int l = 0; l < s.gateways(); ++l) {
    const std::vector<int> gs = s.groups_of_gateway(l);
    std::vector<double> r;
    r.reserve(gs.size());
    for (int m : gs) r.push_back(group_private_rate(m));
    std::sort(r.begin(), r.end());
    // Water level t with sum_m max(0, t - r_m) = R_c,l.
    const double budget = std::max(0.0, cluster_common_rate(l));
    double level = r.front() + budget;
    double prefix = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      prefix += r[i];
      const double t = (budget + prefix) / static_cast<double>(i + 1);
      if (i + 1 == r.size() || t <= r[i + 1]) {
        level = t;
        break;
      }
    }
    for (int m : gs) portions(m) = std::max(0.0, level - group_private_rate(m));
  }
  return portions;
}

RateReport aggregate_group_rates(const VectorXd& common_rate, const VectorXd& private_rate,
                                 const PrecoderSet& p, const Scenario& s,
                                 const std::optional<VectorXd>& portions) {
  RateReport rep;
  rep.common_rate = common_rate;
  rep.private_rate = private_rate;
  const double inf = std::numeric_limits<double>::infinity();

  rep.group_private_rate = VectorXd::Constant(s.groups(), inf);
  for (int k = 0; k < s.users(); ++k) {
    const int m = s.user_to_group[k];
    rep.group_private_rate(m) = std::min(rep.group_private_rate(m), private_rate(k));
  }

  rep.cluster_common_rate = VectorXd::Zero(s.gateways());
  if (p.has_common()) {
    rep.cluster_common_rate.setConstant(inf);
    for (int k = 0; k < s.users(); ++k) {
      const int l = s.gateway_of_user(k);
      rep.cluster_common_rate(l) = std::min(rep.cluster_common_rate(l), common_rate(k));
    }
    if (portions) {
      if (portions->size() != s.groups())
        throw Error(ErrorCode::dimension_mismatch, "one common-rate portion per group");
      rep.portions = *portions;
    } else {
      rep.portions = split_common_rate(rep.cluster_common_rate, rep.group_private_rate, s);
    }
    rep.group_rate = rep.portions + rep.group_private_rate;
  } else {
    rep.portions = VectorXd::Zero(s.groups());
    rep.group_rate = rep.group_private_rate;
  }
  rep.mmf = rep.group_rate.minCoeff();
  return rep;
}

RateReport sinr_and_rates(const EffectiveChannel& hbar, const VectorXd& noise,
                          const PrecoderSet& p, const Scenario& s,
                          const std::optional<VectorXd>& portions) {
  check_precoders(p, s);
  const int K = s.users();
  const int L = s.gateways();
  if (static_cast<int>(hbar.size()) != L || noise.size() != K)
    throw Error(ErrorCode::dimension_mismatch, "effective channel or noise has the wrong size");

  std::vector<std::vector<int>> groups_of(L);
  for (int l = 0; l < L; ++l) groups_of[l] = s.groups_of_gateway(l);

  VectorXd gc = VectorXd::Zero(K);
  VectorXd gp(K);
  for (int k = 0; k < K; ++k) {
    const int own_group = s.user_to_group[k];
    const int own = s.group_to_gateway[own_group];
    const auto& h_own = hbar[own].col(k);

    const double desired_p = std::norm(h_own.dot(p.priv[own_group]));
    double intra = 0.0;
    for (int m : groups_of[own])
      if (m != own_group) intra += std::norm(h_own.dot(p.priv[m]));
    double inter = 0.0;
    for (int j = 0; j < L; ++j) {
      if (j == own) continue;
      const auto& h_j = hbar[j].col(k);
      if (p.has_common()) inter += std::norm(h_j.dot(p.common[j]));
      for (int m : groups_of[j]) inter += std::norm(h_j.dot(p.priv[m]));
    }
    // Private denominator is I_c - |hbar^H p_mu(k)|^2 written without the
    // cancellation, so zero common power reproduces NoRS bit for bit.
    gp(k) = desired_p / (intra + inter + noise(k));
    if (p.has_common()) {
      const double desired_c = std::norm(h_own.dot(p.common[own]));
      gc(k) = desired_c / (desired_p + intra + inter + noise(k));
    }
  }

  VectorXd rc = VectorXd::Zero(K);
  VectorXd rp(K);
  for (int k = 0; k < K; ++k) {
    rp(k) = std::log2(1.0 + gp(k));
    if (p.has_common()) rc(k) = std::log2(1.0 + gc(k));
  }
  RateReport rep = aggregate_group_rates(rc, rp, p, s, portions);
  rep.common_sinr = gc;
  rep.private_sinr = gp;
  rep.effective_noise = noise;
  return rep;
}

AverageRates saa_average_rates(const std::vector<EffectiveChannel>& samples,
                               const std::vector<VectorXd>& noise, const PrecoderSet& p,
                               const Scenario& s) {
  if (samples.empty() || samples.size() != noise.size())
    throw Error(ErrorCode::dimension_mismatch, "need one noise vector per realization");
  AverageRates avg{VectorXd::Zero(s.users()), VectorXd::Zero(s.users())};
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const RateReport r = sinr_and_rates(samples[n], noise[n], p, s);
    avg.common += r.common_rate;
    avg.priv += r.private_rate;
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  avg.common *= inv;
  avg.priv *= inv;
  return avg;
}

VectorXd feeder_noise_floor(const PrecoderSet& p, const Scenario& s) {
  VectorXd out(s.feeds);
  for (int l = 0; l < s.gateways(); ++l) {
    for (int f = 0; f < s.cluster_size(l); ++f) {
      const double rr = p.obp_filter.empty() ? 1.0 : p.obp_filter[l].row(f).squaredNorm();
      out(s.clusters[l][f]) = s.noise_power * rr;
    }
  }
  return out;
}

VectorXd antenna_power_usage(const PrecoderSet& p, const BlockMatrix& feeder, const Scenario& s) {
  check_precoders(p, s);
  const int L = s.gateways();
  if (static_cast<int>(feeder.clusters()) != L)
    throw Error(ErrorCode::dimension_mismatch, "feeder matrix needs L x L blocks");
  VectorXd out = feeder_noise_floor(p, s);
  for (int l = 0; l < L; ++l) {
    VectorXd acc = VectorXd::Zero(s.cluster_size(l));
    for (int j = 0; j < L; ++j) {
      const MatrixXcd& blk = feeder.at(l, j);
      if (p.has_common()) acc += (blk * p.common[j]).cwiseAbs2();
      for (int m : s.groups_of_gateway(j)) acc += (blk * p.priv[m]).cwiseAbs2();
    }
    for (int f = 0; f < s.cluster_size(l); ++f) out(s.clusters[l][f]) += acc(f);
  }
  return out;
}

}  // namespace satrs
