// SPDX-License-Identifier: Apache-2.0
#include "satrs/obp.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include "satrs/error.hpp"
#include "satrs/rng.hpp"

namespace satrs {

namespace {

void check_sizes(const MatrixPerCluster& x, const BlockMatrix& f, const char* what) {
  if (x.size() != f.clusters())
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + " needs one block per gateway");
  for (std::size_t l = 0; l < x.size(); ++l)
    if (x[l].rows() != f.at(l, l).rows() || x[l].cols() != f.at(l, l).cols())
      throw Error(ErrorCode::dimension_mismatch, std::string(what) + " block is not |B_l| x |B_l|");
}

double total_power(const MatrixPerCluster& w) {
  double t = 0.0;
  for (const auto& b : w) t += b.squaredNorm();
  return t;
}

// Solves A X = B for Hermitian positive (semi)definite A, with jitter on failure.
MatrixXcd hpd_solve(MatrixXcd a, const MatrixXcd& b, const char* what) {
  Eigen::LLT<MatrixXcd> llt(a);
  if (llt.info() != Eigen::Success) {
    spdlog::debug("obp: {} bracket singular, adding 1e-12 I", what);
    a.diagonal().array() += 1e-12;
    llt.compute(a);
    if (llt.info() != Eigen::Success) return a.fullPivLu().solve(b);
  }
  return llt.solve(b);
}

}  // namespace

MseReport sum_mse(const MatrixPerCluster& w, const MatrixPerCluster& r, const BlockMatrix& f,
                  double sigma_n2, double sigma_e2) {
  check_sizes(w, f, "W");
  check_sizes(r, f, "R");
  const std::size_t L = f.clusters();
  const double pw = total_power(w);
  MseReport rep;
  rep.per_receiver = VectorXd::Zero(static_cast<Eigen::Index>(L));
  for (std::size_t l = 0; l < L; ++l) {
    const Eigen::Index bl = r[l].rows();
    MatrixXcd acc = MatrixXcd::Zero(bl, bl);
    for (std::size_t i = 0; i < L; ++i) {
      const MatrixXcd fw = f.at(l, i) * w[i];
      acc.noalias() += fw * fw.adjoint();
    }
    const double rr = r[l].squaredNorm();
    const cplx cross = (r[l] * f.at(l, l) * w[l]).trace();
    const double mse = (r[l] * acc * r[l].adjoint()).trace().real() + sigma_e2 * rr * pw -
                       2.0 * cross.real() + static_cast<double>(bl) + sigma_n2 * rr;
    rep.per_receiver(static_cast<Eigen::Index>(l)) = mse;
    rep.total += mse;
  }
  return rep;
}

MatrixPerCluster update_R(const MatrixPerCluster& w, const BlockMatrix& f, double sigma_n2,
                          double sigma_e2) {
  check_sizes(w, f, "W");
  const std::size_t L = f.clusters();
  const double load = sigma_n2 + sigma_e2 * total_power(w);
  MatrixPerCluster r(L);
  for (std::size_t l = 0; l < L; ++l) {
    const Eigen::Index bl = f.at(l, l).rows();
    MatrixXcd a = load * MatrixXcd::Identity(bl, bl);
    for (std::size_t i = 0; i < L; ++i) {
      const MatrixXcd fw = f.at(l, i) * w[i];
      a.noalias() += fw * fw.adjoint();
    }
    // R = B A^-1 with A Hermitian, so R^H = A^-1 B^H.
    const MatrixXcd b = w[l].adjoint() * f.at(l, l).adjoint();
    r[l] = hpd_solve(a, b.adjoint(), "R").adjoint();
  }
  return r;
}

MatrixPerCluster update_W(const MatrixPerCluster& r, const BlockMatrix& f, double sigma_e2) {
  check_sizes(r, f, "R");
  const std::size_t L = f.clusters();
  const double load = sigma_e2 * total_power(r);
  MatrixPerCluster w(L);
  for (std::size_t l = 0; l < L; ++l) {
    const Eigen::Index bl = f.at(l, l).cols();
    MatrixXcd a = load * MatrixXcd::Identity(bl, bl);
    for (std::size_t i = 0; i < L; ++i) {
      const MatrixXcd rf = r[i] * f.at(i, l);
      a.noalias() += rf.adjoint() * rf;
    }
    w[l] = hpd_solve(a, f.at(l, l).adjoint() * r[l].adjoint(), "W");
  }
  return w;
}

PrecoderSet FirstStageResult::stage_template(Strategy strategy) const {
  PrecoderSet p;
  p.strategy = strategy;
  p.stage = Stage::two_stage;
  p.first_stage = w;
  p.obp_filter = r;
  return p;
}

MatrixPerCluster random_first_stage(const Scenario& s, std::uint64_t seed, std::uint64_t trial) {
  Rng rng = make_stream(seed, trial, StreamPurpose::first_stage_init);
  MatrixPerCluster w;
  for (int l = 0; l < s.gateways(); ++l)
    w.push_back(complex_normal_matrix(rng, s.cluster_size(l), s.cluster_size(l), 1.0));
  return w;
}

FirstStageResult run_first_stage(const BlockMatrix& f_hat, const Scenario& s, double sigma_e2,
                                 const MatrixPerCluster& w0, const FirstStageOptions& opt) {
  check_sizes(w0, f_hat, "W");
  FirstStageResult res;
  res.w = w0;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    res.r = update_R(res.w, f_hat, s.noise_power, sigma_e2);
    res.mse_trace.push_back(sum_mse(res.w, res.r, f_hat, s.noise_power, sigma_e2).total);
    res.w = update_W(res.r, f_hat, sigma_e2);
    const double cur = sum_mse(res.w, res.r, f_hat, s.noise_power, sigma_e2).total;
    res.mse_trace.push_back(cur);
    res.iterations = it;
    if (std::abs(cur - prev) <= opt.tol) {
      res.converged = true;
      break;
    }
    prev = cur;
  }
  if (!res.converged)
    throw Error(ErrorCode::max_iter, "first stage did not converge in " + std::to_string(opt.max_iter) +
                                         " iterations (last MSE " + std::to_string(res.mse_trace.back()) + ")");
  res.effective = effective_feeder(f_hat, res.r, res.w);
  return res;
}

}  // namespace satrs
