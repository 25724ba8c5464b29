#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "satrs/conic.hpp"
#include "satrs/error.hpp"
#include "support.hpp"

using namespace satrs;

namespace {

VectorXd random_real(Rng& rng, int n) {
  std::normal_distribution<double> z(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = z(rng);
  return v;
}

// maximize t s.t. t <= 1 - |p - a|^2.
ConicProgram ball_program(const VectorXd& a) {
  const int d = static_cast<int>(a.size());
  ConicProgram prog;
  prog.num_vars = d + 1;
  prog.layout = {{"p", 0, d}, {"t", d, 1}};
  prog.objective = VectorXd::Zero(d + 1);
  prog.objective(d) = 1.0;
  QuadraticConstraint q;
  q.factor = MatrixXd::Zero(d, d + 1);
  q.factor.leftCols(d) = MatrixXd::Identity(d, d);
  q.b = VectorXd::Zero(d + 1);
  q.b.head(d) = -2.0 * a;
  q.b(d) = 1.0;
  q.c = a.squaredNorm() - 1.0;
  prog.quadratic.push_back(q);
  return prog;
}

// maximize f^T p s.t. |p|^2 <= P.
ConicProgram cauchy_program(const VectorXd& f, double power) {
  const int d = static_cast<int>(f.size());
  ConicProgram prog;
  prog.num_vars = d;
  prog.layout = {{"p", 0, d}};
  prog.objective = f;
  QuadraticConstraint q;
  q.factor = MatrixXd::Identity(d, d);
  q.b = VectorXd::Zero(d);
  q.c = -power;
  prog.quadratic.push_back(q);
  return prog;
}

}  // namespace

TEST_SUITE("conic") {
  TEST_CASE("complex lifting") {
    Rng rng = test::test_rng(40);
    const MatrixXcd a = complex_normal_matrix(rng, 4, 3, 1.0);
    const VectorXcd x = test::random_vector(rng, 3);
    const VectorXcd f = test::random_vector(rng, 3);
    CHECK((lift_matrix(a) * lift_vector(x) - lift_vector(a * x)).norm() <= 1e-12);
    CHECK((unlift_vector(lift_vector(x)) - x).norm() == 0.0);
    const MatrixXcd b = complex_normal_matrix(rng, 3, 3, 1.0);
    const MatrixXcd herm = b * b.adjoint();
    const double q = x.dot(herm * x).real();
    CHECK(lift_vector(x).dot(lift_matrix(herm) * lift_vector(x)) == doctest::Approx(q).epsilon(1e-12));
    CHECK(lift_vector(f).dot(lift_vector(x)) == doctest::Approx(f.dot(x).real()).epsilon(1e-12));
  }

  TEST_CASE("symmetric factor") {
    Rng rng = test::test_rng(41);
    const MatrixXcd b = complex_normal_matrix(rng, 4, 2, 1.0);
    const MatrixXd q = lift_matrix(b * b.adjoint());
    const MatrixXd f = symmetric_factor(q);
    CHECK(f.rows() == 4);
    CHECK((f.transpose() * f - q).norm() <= 1e-10 * q.norm());
    CHECK(symmetric_factor(MatrixXd::Zero(3, 3)).rows() == 0);
    MatrixXd neg = MatrixXd::Identity(2, 2);
    neg(1, 1) = -1.0;
    CHECK_THROWS_AS(symmetric_factor(neg), Error);
  }

  TEST_CASE("cone step length matches bisection") {
    Rng rng = test::test_rng(42);
    auto inside = [](const VectorXd& v) { return v(0) >= v.tail(v.size() - 1).norm(); };
    for (int i = 0; i < 20; ++i) {
      VectorXd x = random_real(rng, 4);
      x(0) = x.tail(3).norm() + 0.5;
      const VectorXd d = random_real(rng, 4);
      const double a = soc::max_step(x, d);
      if (!std::isfinite(a)) {
        CHECK(inside(x + 1e6 * d));
        continue;
      }
      double lo = 0.0, hi = 1.0;
      while (inside(x + hi * d)) hi *= 2.0;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (inside(x + mid * d) ? lo : hi) = mid;
      }
      CHECK(a == doctest::Approx(lo).epsilon(1e-9));
    }
  }

  TEST_CASE("Nesterov-Todd scaling maps z and s to the same point") {
    Rng rng = test::test_rng(43);
    for (int i = 0; i < 10; ++i) {
      VectorXd s = random_real(rng, 5), z = random_real(rng, 5);
      s(0) = s.tail(4).norm() + 0.3;
      z(0) = z.tail(4).norm() + 0.7;
      const soc::Scaling w = soc::nt_scaling(s, z);
      CHECK((w.apply(z) - w.apply_inverse(s)).norm() <= 1e-10 * (1.0 + s.norm() + z.norm()));
      CHECK((w.apply_inverse(w.apply(s)) - s).norm() <= 1e-10 * (1.0 + s.norm()));
      const VectorXd u = soc::jordan_product(s, z);
      CHECK((soc::jordan_divide(s, u) - z).norm() <= 1e-10 * (1.0 + z.norm()));
    }
  }

  TEST_CASE("analytic examples") {
    Rng rng = test::test_rng(44);
    const VectorXd a = random_real(rng, 5) * 0.5;
    const ConicSolution b = solve(ball_program(a));
    REQUIRE(b.status == SolveStatus::optimal);
    CHECK(b.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK((b.x.head(5) - a).norm() <= 1e-4);

    const VectorXd f = random_real(rng, 6);
    const double P = 3.0;
    const ConicSolution c = solve(cauchy_program(f, P));
    REQUIRE(c.status == SolveStatus::optimal);
    CHECK(std::abs(c.objective - std::sqrt(P) * f.norm()) <= 1e-8);
    CHECK((c.x - std::sqrt(P) * f / f.norm()).norm() <= 1e-4);
  }

  TEST_CASE("infeasible program is reported") {
    ConicProgram prog = cauchy_program(VectorXd::Ones(2), 1.0);
    LinearConstraint l;
    l.a = -VectorXd::Ones(2);
    l.b = -10.0;
    prog.linear.push_back(l);
    CHECK(solve(prog).status != SolveStatus::optimal);
  }

  TEST_CASE("barrier oracle agrees on a random precoder update") {
    const Scenario s = test::small_scenario(2, 3);
    const auto rp = test::random_subproblem(s, 0, Strategy::rs);
    const ConicSolution sol = solve(rp.sp.program);
    REQUIRE(sol.status == SolveStatus::optimal);
    const test::BarrierResult ref = test::barrier_solve(rp.sp.program, rp.x0);
    REQUIRE(ref.ok);
    CHECK(std::abs(sol.objective - ref.objective) <= 1e-5);
  }

  TEST_CASE("program dump is deterministic") {
    const ConicProgram prog = ball_program(VectorXd::Ones(2));
    std::ostringstream a, b;
    write_program(a, prog);
    write_program(b, prog);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("t") != std::string::npos);
  }
}
