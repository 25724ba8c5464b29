// SPDX-License-Identifier: Apache-2.0
#include "satrs/wmmse.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "satrs/error.hpp"

namespace satrs {

UserMmse user_mmse(const EffectiveChannel& hbar, double noise, const PrecoderSet& p,
                   const Scenario& s, int k) {
  const int own_group = s.user_to_group[k];
  const int own = s.group_to_gateway[own_group];
  UserMmse r;
  double total = noise;
  for (int j = 0; j < s.gateways(); ++j) {
    const auto& h = hbar[j].col(k);
    if (p.has_common() && j != own) total += std::norm(h.dot(p.common[j]));
    for (int m = 0; m < s.groups(); ++m)
      if (s.group_to_gateway[m] == j) total += std::norm(h.dot(p.priv[m]));
  }
  const auto& h_own = hbar[own].col(k);
  r.a = h_own.dot(p.priv[own_group]);
  r.total = total;
  r.interf = total - std::norm(r.a);
  r.g = std::conj(r.a) / r.total;
  r.eps = r.interf / r.total;
  if (p.has_common()) {
    r.a_c = h_own.dot(p.common[own]);
    r.total_c = total + std::norm(r.a_c);
    r.interf_c = total;
    r.g_c = std::conj(r.a_c) / r.total_c;
    r.eps_c = r.interf_c / r.total_c;
  } else {
    r.total_c = total;
    r.interf_c = total;
  }
  return r;
}

double mse(cplx g, double total, cplx a) { return std::norm(g) * total - 2.0 * (g * a).real() + 1.0; }

double optimal_weight(double eps, bool* clamped) {
  if (!(eps > 0.0)) throw Error(ErrorCode::nonpositive_mmse, "MMSE must be positive");
  bool hit = false;
  if (eps < kMmseFloor) {
    eps = kMmseFloor;
    hit = true;
  }
  double u = 1.0 / eps;
  if (u < kWeightMin) {
    u = kWeightMin;
    hit = true;
  } else if (u > kWeightMax) {
    u = kWeightMax;
    hit = true;
  }
  if (clamped) *clamped = hit;
  return u;
}

double augmented_wmse(double u, double eps) { return u * eps - std::log2(u); }

namespace {

void init_user(SafUser& out, const Scenario& s, int k) {
  out.psi.assign(s.gateways(), MatrixXcd());
  for (int j = 0; j < s.gateways(); ++j)
    out.psi[j] = MatrixXcd::Zero(s.cluster_size(j), s.cluster_size(j));
  out.f = VectorXcd::Zero(s.cluster_size(s.gateway_of_user(k)));
}

// Adds one sample's contribution for the stream with equalizer g, weight u.
void accumulate(SafUser& out, const EffectiveChannel& hbar, int k, int own, cplx g, double u,
                double eps, double noise) {
  const double t = u * std::norm(g);
  out.t += t;
  for (std::size_t j = 0; j < hbar.size(); ++j) {
    const auto& h = hbar[j].col(k);
    out.psi[j].noalias() += t * (h * h.adjoint());
  }
  out.f += (u * std::conj(g)) * hbar[own].col(k);
  out.v += std::log2(u);
  out.u += u;
  out.noise += t * noise;
  out.xi += augmented_wmse(u, eps);
  out.rate += -std::log2(eps);
}

void finish(SafUser& out, double inv) {
  out.t *= inv;
  for (auto& m : out.psi) m *= inv;
  out.f *= inv;
  out.v *= inv;
  out.u *= inv;
  out.noise *= inv;
  out.xi *= inv;
  out.rate *= inv;
}

}  // namespace

SafTerms build_saf_terms(const std::vector<EffectiveChannel>& samples,
                         const std::vector<VectorXd>& noise, const PrecoderSet& p,
                         const Scenario& s) {
  if (samples.empty() || samples.size() != noise.size())
    throw Error(ErrorCode::dimension_mismatch, "need one noise vector per realization");
  check_precoders(p, s);
  const int K = s.users();
  SafTerms saf;
  saf.samples = static_cast<int>(samples.size());
  saf.priv.resize(K);
  for (int k = 0; k < K; ++k) init_user(saf.priv[k], s, k);
  if (p.has_common()) {
    saf.common.resize(K);
    for (int k = 0; k < K; ++k) init_user(saf.common[k], s, k);
  }
  for (std::size_t n = 0; n < samples.size(); ++n) {
    for (int k = 0; k < K; ++k) {
      const int own = s.gateway_of_user(k);
      const UserMmse m = user_mmse(samples[n], noise[n](k), p, s, k);
      bool hit = false;
      const double u = optimal_weight(m.eps, &hit);
      saf.clamped += hit;
      accumulate(saf.priv[k], samples[n], k, own, m.g, u, std::max(m.eps, kMmseFloor), noise[n](k));
      if (p.has_common()) {
        const double uc = optimal_weight(m.eps_c, &hit);
        saf.clamped += hit;
        accumulate(saf.common[k], samples[n], k, own, m.g_c, uc, std::max(m.eps_c, kMmseFloor),
                   noise[n](k));
      }
    }
  }
  if (saf.clamped > 0) spdlog::debug("wmmse: {} weights clamped", saf.clamped);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto& u : saf.priv) finish(u, inv);
  for (auto& u : saf.common) finish(u, inv);
  return saf;
}

namespace {

double quad(const MatrixXcd& psi, const VectorXcd& x) { return x.dot(psi * x).real(); }

double stream_sum(const SafUser& su, const PrecoderSet& p, const Scenario& s, int skip_common) {
  double acc = 0.0;
  if (p.has_common())
    for (int j = 0; j < s.gateways(); ++j)
      if (j != skip_common) acc += quad(su.psi[j], p.common[j]);
  for (int m = 0; m < s.groups(); ++m) acc += quad(su.psi[s.group_to_gateway[m]], p.priv[m]);
  return acc;
}

}  // namespace

double private_wmse_expression(const SafTerms& saf, const PrecoderSet& p, const Scenario& s, int k) {
  const SafUser& su = saf.priv.at(k);
  const int own_group = s.user_to_group[k];
  return stream_sum(su, p, s, s.group_to_gateway[own_group]) + su.noise -
         2.0 * su.f.dot(p.priv[own_group]).real() + su.u - su.v;
}

double common_wmse_expression(const SafTerms& saf, const PrecoderSet& p, const Scenario& s, int k) {
  if (!p.has_common()) throw Error(ErrorCode::mode_mismatch, "NoRS has no common stream");
  const SafUser& su = saf.common.at(k);
  const int own = s.gateway_of_user(k);
  return stream_sum(su, p, s, -1) + su.noise - 2.0 * su.f.dot(p.common[own]).real() + su.u - su.v;
}

}  // namespace satrs
