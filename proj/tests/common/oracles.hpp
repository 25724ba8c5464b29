// Independent reference solvers used by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "satrs/ao.hpp"
#include "satrs/channel.hpp"
#include "satrs/conic.hpp"
#include "satrs/obp.hpp"
#include "satrs/rng.hpp"
#include "satrs/subproblem.hpp"
#include "satrs/wmmse.hpp"

namespace satrs::test {

struct BarrierResult {
  VectorXd x;
  double objective = 0.0;
  bool ok = false;
};

/// Primal log-barrier method with damped Newton steps on the program's
/// original (unlifted) quadratic constraints. Needs a strictly feasible x0.
inline BarrierResult barrier_solve(const ConicProgram& prog, VectorXd x, double gap_target = 1e-9) {
  const int n = prog.num_vars;
  const int m = static_cast<int>(prog.linear.size() + prog.quadratic.size());
  std::vector<MatrixXd> ftf;
  for (const auto& q : prog.quadratic) ftf.push_back(q.factor.transpose() * q.factor);

  auto values = [&](const VectorXd& y, VectorXd& f) {
    f.resize(m);
    int i = 0;
    for (const auto& l : prog.linear) f(i++) = l.a.dot(y) - l.b;
    for (const auto& q : prog.quadratic) f(i++) = q.value(y);
    return (f.array() < 0.0).all();
  };
  auto phi = [&](const VectorXd& y, double t, double& out) {
    VectorXd f;
    if (!values(y, f)) return false;
    out = -t * prog.objective.dot(y) - (-f.array()).log().sum();
    return true;
  };

  BarrierResult res;
  VectorXd f;
  if (!values(x, f)) return res;
  double t = 1.0;
  while (true) {
    for (int it = 0; it < 200; ++it) {
      values(x, f);
      VectorXd g = -t * prog.objective;
      MatrixXd h = MatrixXd::Zero(n, n);
      int i = 0;
      for (const auto& l : prog.linear) {
        const double w = -1.0 / f(i++);
        g += w * l.a;
        h += (w * w) * l.a * l.a.transpose();
      }
      for (std::size_t k = 0; k < prog.quadratic.size(); ++k) {
        const auto& q = prog.quadratic[k];
        const double w = -1.0 / f(i++);
        const VectorXd grad = 2.0 * ftf[k] * x + q.b;
        g += w * grad;
        h += (w * w) * grad * grad.transpose() + (2.0 * w) * ftf[k];
      }
      h.diagonal().array() += 1e-13 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
      const VectorXd dx = -h.ldlt().solve(g);
      const double dec = -g.dot(dx);
      if (dec / 2.0 <= 1e-12) break;
      double phi0 = 0.0, phi1 = 0.0;
      phi(x, t, phi0);
      double step = 1.0;
      while (step > 1e-14 && !(phi(x + step * dx, t, phi1) && phi1 <= phi0 - 0.25 * step * dec)) step *= 0.5;
      if (step <= 1e-14) break;
      x += step * dx;
    }
    if (m / t <= gap_target) break;
    t *= 8.0;
  }
  res.x = x;
  res.objective = prog.objective.dot(x);
  res.ok = true;
  return res;
}

/// A precoder-update program built at a scaled-down AO initialization, with
/// a strictly feasible starting point for the barrier oracle.
struct RandomSubproblem {
  Scenario s;
  AoInput in;
  Subproblem sp;
  VectorXd x0;
};

inline RandomSubproblem random_subproblem(const Scenario& s, std::uint64_t trial, Strategy st) {
  RandomSubproblem r{s, {}, {}, {}};
  const ChannelDraw d = make_channel_draw(s, trial);
  r.in = make_ao_input(d, s, PrecoderSet{});
  PrecoderSet p = initialize_precoders(r.in, s, st);
  for (auto& v : p.common) v *= 0.8;
  for (auto& v : p.priv) v *= 0.8;
  const SafTerms saf = build_saf_terms(r.in.samples, r.in.sample_noise, p, s);
  r.sp = build_program(saf, r.in.power, s, st);
  const ProgramLayout& lay = r.sp.layout;
  VectorXd x = pack_precoders(lay, p, r.sp.program.num_vars);
  double rg = std::numeric_limits<double>::infinity();
  for (int m = 0; m < s.groups(); ++m) {
    double rm = std::numeric_limits<double>::infinity();
    for (int k : s.users_of_group(m)) rm = std::min(rm, 1.0 - saf.priv[k].xi);
    x(lay.r + m) = rm - 0.05;
    double cm = 0.0;
    if (st == Strategy::rs) {
      const int l = s.group_to_gateway[m];
      double rc = std::numeric_limits<double>::infinity();
      for (int k : s.users_of_gateway(l)) rc = std::min(rc, 1.0 - saf.common[k].xi);
      cm = 0.5 * rc / static_cast<double>(s.groups_of_gateway(l).size());
      x(lay.c + m) = cm;
    }
    rg = std::min(rg, x(lay.r + m) + cm);
  }
  x(lay.rg) = rg - 0.05;
  r.x0 = x;
  return r;
}

/// Monte-Carlo estimate of sum_l E|d_hat_l - d_l|^2 with unit-covariance
/// symbols, receiver noise of variance sigma_n2 and feeder errors of variance
/// sigma_e2 on every entry of every block.
inline double monte_carlo_sum_mse(const MatrixPerCluster& w, const MatrixPerCluster& r, const BlockMatrix& f,
                                  double sigma_n2, double sigma_e2, int draws, Rng& rng) {
  const std::size_t L = f.clusters();
  double acc = 0.0;
  for (int n = 0; n < draws; ++n) {
    std::vector<VectorXcd> d(L);
    for (std::size_t l = 0; l < L; ++l) d[l] = complex_normal_matrix(rng, w[l].cols(), 1, 1.0);
    for (std::size_t l = 0; l < L; ++l) {
      VectorXcd y = complex_normal_matrix(rng, r[l].cols(), 1, sigma_n2);
      for (std::size_t i = 0; i < L; ++i) {
        MatrixXcd fe = f.at(l, i);
        if (sigma_e2 > 0.0) fe += complex_normal_matrix(rng, fe.rows(), fe.cols(), sigma_e2);
        y += fe * (w[i] * d[i]);
      }
      acc += (r[l] * y - d[l]).squaredNorm();
    }
  }
  return acc / static_cast<double>(draws);
}

/// Largest central-difference partial derivative of `fn` over the real and
/// imaginary parts of every entry of every block of `x`.
template <typename Fn>
double max_fd_gradient(MatrixPerCluster x, Fn fn, double h = 1e-6) {
  double worst = 0.0;
  for (auto& blk : x)
    for (Eigen::Index i = 0; i < blk.size(); ++i)
      for (cplx dir : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
        const cplx orig = blk.data()[i];
        blk.data()[i] = orig + h * dir;
        const double up = fn(x);
        blk.data()[i] = orig - h * dir;
        const double dn = fn(x);
        blk.data()[i] = orig;
        worst = std::max(worst, std::abs(up - dn) / (2.0 * h));
      }
  return worst;
}

}  // namespace satrs::test
