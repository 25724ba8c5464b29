// SPDX-License-Identifier: Apache-2.0
#include "satrs/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "satrs/error.hpp"

namespace satrs {

std::string_view to_string(ConstraintTag t) {
  switch (t) {
    case ConstraintTag::mmf_link: return "mmf-link";
    case ConstraintTag::private_wmse: return "private-wmse";
    case ConstraintTag::common_wmse: return "common-wmse";
    case ConstraintTag::nonneg_portion: return "nonneg-portion";
    case ConstraintTag::feed_power: return "feed-power";
    case ConstraintTag::generic: return "generic";
  }
  return "unknown";
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

double QuadraticConstraint::value(const VectorXd& x) const {
  double q = factor.rows() ? (factor * x).squaredNorm() : 0.0;
  return q + b.dot(x) + c;
}

const VariableBlock& ConicProgram::block(std::string_view name) const {
  for (const auto& b : layout)
    if (b.name == name) return b;
  throw Error(ErrorCode::dimension_mismatch, "no variable block named " + std::string(name));
}

int ConicProgram::count(ConstraintTag t) const {
  int n = 0;
  for (const auto& c : linear) n += c.tag == t;
  for (const auto& c : quadratic) n += c.tag == t;
  return n;
}

MatrixXd lift_matrix(const MatrixXcd& a) {
  const Eigen::Index r = a.rows(), c = a.cols();
  MatrixXd out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = a.real();
  out.topRightCorner(r, c) = -a.imag();
  out.bottomLeftCorner(r, c) = a.imag();
  out.bottomRightCorner(r, c) = a.real();
  return out;
}

VectorXd lift_vector(const VectorXcd& x) {
  VectorXd out(2 * x.size());
  out.head(x.size()) = x.real();
  out.tail(x.size()) = x.imag();
  return out;
}

VectorXcd unlift_vector(const VectorXd& x) {
  const Eigen::Index n = x.size() / 2;
  VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = cplx(x(i), x(n + i));
  return out;
}

MatrixXd symmetric_factor(const MatrixXd& q) {
  if (q.rows() != q.cols()) throw Error(ErrorCode::dimension_mismatch, "factor of a non-square matrix");
  if (q.rows() == 0) return MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (q + q.transpose()));
  const VectorXd& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-8 * scale)
    throw Error(ErrorCode::non_psd, "quadratic form has eigenvalue " + std::to_string(ev.minCoeff()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-14 * scale) keep.push_back(i);
  MatrixXd f(static_cast<Eigen::Index>(keep.size()), q.cols());
  for (std::size_t r = 0; r < keep.size(); ++r)
    f.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(ev(keep[r])) * es.eigenvectors().col(keep[r]).transpose();
  return f;
}

namespace soc {

namespace {
double jdot(const VectorXd& a, const VectorXd& b) {
  return a(0) * b(0) - a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}
VectorXd jmul(const VectorXd& x) {
  VectorXd y = -x;
  y(0) = x(0);
  return y;
}
}  // namespace

double max_step(const VectorXd& x, const VectorXd& d) {
  const double knorm2 = jdot(x, x);
  if (!(knorm2 > 0.0) || x(0) <= 0.0) return 0.0;
  const double knorm = std::sqrt(knorm2);
  const VectorXd lbar = x / knorm;
  const double lbar_d = jdot(lbar, d);
  const double rho0 = lbar_d / knorm;
  const double factor = (lbar_d + d(0)) / (lbar(0) + 1.0);
  const Eigen::Index n = x.size() - 1;
  const VectorXd rho1 = (d.tail(n) - factor * lbar.tail(n)) / knorm;
  const double sigma = rho1.norm() - rho0;
  return sigma > 0.0 ? 1.0 / sigma : std::numeric_limits<double>::infinity();
}

VectorXd Scaling::apply(const VectorXd& x) const {
  return beta * (2.0 * v.dot(x) * v - jmul(x));
}

VectorXd Scaling::apply_inverse(const VectorXd& x) const {
  const VectorXd a = jmul(v);
  return (2.0 * a.dot(x) * a - jmul(x)) / beta;
}

Scaling nt_scaling(const VectorXd& s, const VectorXd& z) {
  const double aa = std::sqrt(jdot(s, s));
  const double bb = std::sqrt(jdot(z, z));
  const VectorXd sb = s / aa;
  const VectorXd zb = z / bb;
  const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
  VectorXd w = (sb + jmul(zb)) / (2.0 * gamma);
  Scaling sc;
  sc.beta = std::sqrt(aa / bb);
  w(0) += 1.0;
  sc.v = w / std::sqrt(2.0 * w(0));
  return sc;
}

VectorXd jordan_product(const VectorXd& u, const VectorXd& v) {
  const Eigen::Index n = u.size() - 1;
  VectorXd out(u.size());
  out(0) = u.dot(v);
  out.tail(n) = u(0) * v.tail(n) + v(0) * u.tail(n);
  return out;
}

VectorXd jordan_divide(const VectorXd& u, const VectorXd& v) {
  const Eigen::Index n = u.size() - 1;
  VectorXd x(u.size());
  x(0) = (u(0) * v(0) - u.tail(n).dot(v.tail(n))) / jdot(u, u);
  x.tail(n) = (v.tail(n) - x(0) * u.tail(n)) / u(0);
  return x;
}

}  // namespace soc

namespace {

struct Cone {
  Eigen::Index offset;
  Eigen::Index dim;
};

// Problem data in the form min c^T x s.t. G x + s = h, s in R+^ml x SOC...
class ConeProblem {
 public:
  explicit ConeProblem(const ConicProgram& prog) {
    n_ = prog.num_vars;
    ml_ = static_cast<Eigen::Index>(prog.linear.size());
    Eigen::Index m = ml_;
    for (const auto& q : prog.quadratic) {
      cones_.push_back({m, q.factor.rows() + 2});
      m += q.factor.rows() + 2;
    }
    m_ = m;
    g_ = MatrixXd::Zero(m_, n_);
    h_ = VectorXd::Zero(m_);
    c_ = -prog.objective;
    for (Eigen::Index i = 0; i < ml_; ++i) {
      const auto& lc = prog.linear[static_cast<std::size_t>(i)];
      g_.row(i) = lc.a.transpose();
      h_(i) = lc.b;
    }
    for (std::size_t k = 0; k < prog.quadratic.size(); ++k) {
      const auto& qc = prog.quadratic[k];
      const Eigen::Index o = cones_[k].offset;
      g_.row(o) = qc.b.transpose();
      g_.row(o + 1) = qc.b.transpose();
      if (qc.factor.rows()) g_.middleRows(o + 2, qc.factor.rows()) = -2.0 * qc.factor;
      h_(o) = 1.0 - qc.c;
      h_(o + 1) = -1.0 - qc.c;
    }
    for (const auto& cone : cones_) {
      const auto blk = g_.middleRows(cone.offset, cone.dim);
      gram_.push_back(blk.transpose() * blk);
    }
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }
  double degree() const { return static_cast<double>(ml_ + static_cast<Eigen::Index>(cones_.size())); }
  const MatrixXd& g() const { return g_; }
  const VectorXd& h() const { return h_; }
  const VectorXd& c() const { return c_; }

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(m_);
    e.head(ml_).setOnes();
    for (const auto& cone : cones_) e(cone.offset) = 1.0;
    return e;
  }

  // Largest t with x - t e outside the interior: minus the smallest "eigenvalue".
  double min_eigen(const VectorXd& x) const {
    double mn = std::numeric_limits<double>::infinity();
    if (ml_) mn = x.head(ml_).minCoeff();
    for (const auto& cone : cones_) {
      const auto seg = x.segment(cone.offset, cone.dim);
      mn = std::min(mn, seg(0) - seg.tail(cone.dim - 1).norm());
    }
    return mn;
  }

  double max_step(const VectorXd& x, const VectorXd& d) const {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ml_; ++i)
      if (d(i) < 0.0) a = std::min(a, -x(i) / d(i));
    for (const auto& cone : cones_)
      a = std::min(a, soc::max_step(x.segment(cone.offset, cone.dim), d.segment(cone.offset, cone.dim)));
    return a;
  }

  VectorXd product(const VectorXd& u, const VectorXd& v) const {
    VectorXd out(m_);
    out.head(ml_) = u.head(ml_).cwiseProduct(v.head(ml_));
    for (const auto& cone : cones_)
      out.segment(cone.offset, cone.dim) =
          soc::jordan_product(u.segment(cone.offset, cone.dim), v.segment(cone.offset, cone.dim));
    return out;
  }

  VectorXd divide(const VectorXd& u, const VectorXd& v) const {
    VectorXd out(m_);
    out.head(ml_) = v.head(ml_).cwiseQuotient(u.head(ml_));
    for (const auto& cone : cones_)
      out.segment(cone.offset, cone.dim) =
          soc::jordan_divide(u.segment(cone.offset, cone.dim), v.segment(cone.offset, cone.dim));
    return out;
  }

  struct Scaling {
    VectorXd d;  // orthant: W = diag(d)
    std::vector<soc::Scaling> soc;
  };

  Scaling scaling(const VectorXd& s, const VectorXd& z) const {
    Scaling w;
    w.d = (s.head(ml_).cwiseQuotient(z.head(ml_))).cwiseSqrt();
    for (const auto& cone : cones_)
      w.soc.push_back(soc::nt_scaling(s.segment(cone.offset, cone.dim), z.segment(cone.offset, cone.dim)));
    return w;
  }

  VectorXd apply(const Scaling& w, const VectorXd& x, bool inverse) const {
    VectorXd out(m_);
    if (inverse)
      out.head(ml_) = x.head(ml_).cwiseQuotient(w.d);
    else
      out.head(ml_) = x.head(ml_).cwiseProduct(w.d);
    for (std::size_t k = 0; k < cones_.size(); ++k) {
      const auto& cone = cones_[k];
      const VectorXd seg = x.segment(cone.offset, cone.dim);
      out.segment(cone.offset, cone.dim) = inverse ? w.soc[k].apply_inverse(seg) : w.soc[k].apply(seg);
    }
    return out;
  }

  // G^T W^-2 G.
  MatrixXd reduced_matrix(const Scaling& w) const {
    MatrixXd hm = MatrixXd::Zero(n_, n_);
    if (ml_) {
      const auto gl = g_.topRows(ml_);
      const VectorXd inv2 = w.d.cwiseInverse().cwiseAbs2();
      hm.noalias() += gl.transpose() * inv2.asDiagonal() * gl;
    }
    for (std::size_t k = 0; k < cones_.size(); ++k) {
      const auto& cone = cones_[k];
      const auto gk = g_.middleRows(cone.offset, cone.dim);
      const VectorXd& v = w.soc[k].v;
      VectorXd a = -v;
      a(0) = v(0);
      const VectorXd ga = gk.transpose() * a;
      const VectorXd gv = gk.transpose() * v;
      const double inv_b2 = 1.0 / (w.soc[k].beta * w.soc[k].beta);
      hm.noalias() += inv_b2 * (4.0 * v.squaredNorm() * ga * ga.transpose() - 2.0 * ga * gv.transpose() -
                                2.0 * gv * ga.transpose() + gram_[k]);
    }
    return hm;
  }

 private:
  Eigen::Index n_ = 0, m_ = 0, ml_ = 0;
  std::vector<Cone> cones_;
  MatrixXd g_;
  VectorXd h_, c_;
  std::vector<MatrixXd> gram_;
};

// Cholesky with growing diagonal regularization.
class ReducedSolver {
 public:
  explicit ReducedSolver(const MatrixXd& hm) {
    const double base = std::max(1.0, hm.diagonal().cwiseAbs().maxCoeff());
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      MatrixXd a = hm;
      if (reg > 0.0) a.diagonal().array() += reg;
      llt_.compute(a);
      if (llt_.info() == Eigen::Success) {
        ok_ = true;
        return;
      }
      reg = reg == 0.0 ? 1e-14 * base : reg * 100.0;
    }
  }
  bool ok() const { return ok_; }
  VectorXd solve(const VectorXd& b) const { return llt_.solve(b); }

 private:
  Eigen::LLT<MatrixXd> llt_;
  bool ok_ = false;
};

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverOptions& opt) {
  if (prog.objective.size() != prog.num_vars)
    throw Error(ErrorCode::dimension_mismatch, "objective length differs from variable count");
  const ConeProblem cp(prog);
  const MatrixXd& G = cp.g();
  const VectorXd& h = cp.h();
  const VectorXd& c = cp.c();
  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());
  const VectorXd e = cp.identity();

  // Initial point: least-squares primal, minimum-norm dual, shifted inside.
  // The ridge keeps x bounded along directions no constraint reaches.
  MatrixXd gram = G.transpose() * G;
  gram.diagonal().array() += 1e-10 * std::max(1.0, gram.diagonal().maxCoeff());
  const ReducedSolver gram_solver(gram);
  if (!gram_solver.ok()) throw Error(ErrorCode::dimension_mismatch, "initial least-squares solve failed");
  VectorXd x = gram_solver.solve(G.transpose() * h);
  VectorXd s = h - G * x;
  VectorXd z = -G * gram_solver.solve(c);
  {
    const double ts = -cp.min_eigen(s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    const double tz = -cp.min_eigen(z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  }

  ConicSolution sol;
  auto fill = [&](SolveStatus st, int it) {
    sol.status = st;
    sol.iterations = it;
    sol.x = x;
    sol.objective = prog.objective.dot(x);
    sol.primal_residual = (G * x + s - h).norm() / hnorm;
    sol.dual_residual = (G.transpose() * z + c).norm() / cnorm;
    sol.gap = s.dot(z);
    const double pcost = c.dot(x);
    const double dcost = -h.dot(z);
    sol.relative_gap = pcost < 0.0   ? sol.gap / -pcost
                       : dcost > 0.0 ? sol.gap / dcost
                                     : std::numeric_limits<double>::infinity();
  };

  const double deg = cp.degree();
  for (int it = 0; it < opt.max_iter; ++it) {
    const VectorXd rx = G.transpose() * z + c;
    const VectorXd rz = G * x + s - h;
    fill(SolveStatus::max_iter, it);
    if (sol.primal_residual <= opt.feastol && sol.dual_residual <= opt.dual_feastol &&
        (sol.gap <= opt.abstol || sol.relative_gap <= opt.reltol)) {
      sol.status = SolveStatus::optimal;
      return sol;
    }
    spdlog::trace("conic it {:2d} pcost {:+.10e} pres {:.2e} dres {:.2e} gap {:.2e}", it, c.dot(x),
                  sol.primal_residual, sol.dual_residual, sol.gap);
    if (z.norm() > 1e14 || s.norm() > 1e14) {
      sol.status = SolveStatus::infeasible;
      return sol;
    }

    const auto w = cp.scaling(s, z);
    const VectorXd lambda = cp.apply(w, z, false);
    const double mu = s.dot(z) / deg;
    const ReducedSolver kkt(cp.reduced_matrix(w));
    if (!kkt.ok()) {
      spdlog::warn("conic: reduced system singular at iteration {}", it);
      return sol;
    }
    const VectorXd bx = -rx;
    const VectorXd bz = -rz;

    struct Step {
      VectorXd dx, ds, dz;
    };
    // Solves G^T dz = rx_, G dx + ds = rz_, W dz + W^-1 ds = q through the
    // reduced system, then refines against the unreduced residuals.
    auto reduced = [&](const VectorXd& rx_, const VectorXd& rz_, const VectorXd& q) {
      Step st;
      const VectorXd t = cp.apply(w, cp.apply(w, rz_, true) - q, true);
      st.dx = kkt.solve(rx_ + G.transpose() * t);
      const VectorXd gdx = G * st.dx;
      st.dz = cp.apply(w, cp.apply(w, gdx - rz_, true) + q, true);
      st.ds = rz_ - gdx;
      return st;
    };
    auto newton = [&](const VectorXd& q) {
      Step st = reduced(bx, bz, q);
      for (int ref = 0; ref < 2; ++ref) {
        const VectorXd r1 = bx - G.transpose() * st.dz;
        const VectorXd r2 = bz - G * st.dx - st.ds;
        const VectorXd r3 = q - cp.apply(w, st.dz, false) - cp.apply(w, st.ds, true);
        const Step corr = reduced(r1, r2, r3);
        st.dx += corr.dx;
        st.ds += corr.ds;
        st.dz += corr.dz;
      }
      return st;
    };

    const Step aff = newton(-lambda);
    const double a_aff = std::min({1.0, cp.max_step(s, aff.ds), cp.max_step(z, aff.dz)});
    const double sigma = std::pow(1.0 - a_aff, 3.0);

    const VectorXd ds_scaled = cp.apply(w, aff.ds, true);
    const VectorXd dz_scaled = cp.apply(w, aff.dz, false);
    const VectorXd target =
        -cp.product(lambda, lambda) - cp.product(ds_scaled, dz_scaled) + sigma * mu * e;
    const Step comb = newton(cp.divide(lambda, target));
    const double amax = std::min(cp.max_step(s, comb.ds), cp.max_step(z, comb.dz));
    const double alpha = std::min(1.0, 0.99 * amax);
    if (!(alpha > 1e-12)) {
      spdlog::debug("conic: step length collapsed at iteration {}", it);
      return sol;
    }
    x += alpha * comb.dx;
    s += alpha * comb.ds;
    z += alpha * comb.dz;
  }
  fill(SolveStatus::max_iter, opt.max_iter);
  if (sol.primal_residual <= opt.feastol && sol.dual_residual <= opt.dual_feastol &&
      (sol.gap <= opt.abstol || sol.relative_gap <= opt.reltol))
    sol.status = SolveStatus::optimal;
  return sol;
}

void write_program(std::ostream& os, const ConicProgram& prog) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  os << "# satrs conic program v1\n";
  os << "vars " << prog.num_vars << '\n';
  for (const auto& b : prog.layout) os << "block " << b.name << ' ' << b.offset << ' ' << b.length << '\n';
  auto vec = [&](const VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
    os << '\n';
  };
  os << "maximize\n";
  vec(prog.objective);
  for (const auto& lc : prog.linear) {
    os << "linear " << to_string(lc.tag) << ' ' << lc.index << " b " << lc.b << '\n';
    vec(lc.a);
  }
  for (const auto& qc : prog.quadratic) {
    os << "quadratic " << to_string(qc.tag) << ' ' << qc.index << " rows " << qc.factor.rows() << " c "
       << qc.c << '\n';
    vec(qc.b);
    for (Eigen::Index r = 0; r < qc.factor.rows(); ++r) vec(qc.factor.row(r).transpose());
  }
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace satrs
