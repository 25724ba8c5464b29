#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "satrs/obp.hpp"
#include "support.hpp"

using namespace satrs;

namespace {

BlockMatrix identity_feeder(int b) {
  BlockMatrix f(1);
  f.at(0, 0) = MatrixXcd::Identity(b, b);
  return f;
}

MatrixPerCluster scaled_identity(int b, double c) { return {c * MatrixXcd::Identity(b, b)}; }

}  // namespace

TEST_SUITE("obp") {
  TEST_CASE("scalar MMSE arithmetic") {
    const BlockMatrix f = identity_feeder(3);
    CHECK(sum_mse(scaled_identity(3, 1.0), scaled_identity(3, 0.5), f, 1.0, 0.0).total == doctest::Approx(1.5));
    CHECK(sum_mse(scaled_identity(3, 0.0), scaled_identity(3, 0.0), f, 1.0, 0.3).total == doctest::Approx(3.0));
  }

  TEST_CASE("closed-form updates on identity channels") {
    const BlockMatrix f = identity_feeder(3);
    const MatrixPerCluster r = update_R(scaled_identity(3, 1.0), f, 1.0, 0.0);
    CHECK((r[0] - 0.5 * MatrixXcd::Identity(3, 3)).norm() <= 1e-14);
    const MatrixPerCluster w = update_W(scaled_identity(3, 0.5), f, 0.0);
    CHECK((w[0] - 2.0 * MatrixXcd::Identity(3, 3)).norm() <= 1e-12);
    const MatrixPerCluster r_noisy = update_R(scaled_identity(3, 1.0), f, 1e12, 0.0);
    CHECK(r_noisy[0].norm() <= 1e-11);
  }

  TEST_CASE("zero filter gives a degenerate precoder") {
    const BlockMatrix f = identity_feeder(2);
    const MatrixPerCluster r = scaled_identity(2, 0.0);
    const MatrixPerCluster w = update_W(r, f, 0.0);
    CHECK(w[0].allFinite());
    CHECK(w[0].norm() <= 1e-8);
    CHECK(sum_mse(w, r, f, 1.0, 0.0).total == doctest::Approx(2.0));
  }

  TEST_CASE("sum MSE matches a Monte-Carlo expectation") {
    const Scenario s = test::small_scenario();
    Rng rng = test::test_rng(60);
    const BlockMatrix f = test::random_blocks(rng, s);
    const MatrixPerCluster w = test::random_square(rng, s, 0.5), r = test::random_square(rng, s, 0.3);
    const double sn = 0.7, se = 0.05;
    const double exact = sum_mse(w, r, f, sn, se).total;
    const double mc = test::monte_carlo_sum_mse(w, r, f, sn, se, 100000, rng);
    CHECK(std::abs(mc - exact) <= 0.01 * exact);
  }

  TEST_CASE("closed forms are stationary") {
    const Scenario s = test::small_scenario();
    Rng rng = test::test_rng(61);
    const BlockMatrix f = test::random_blocks(rng, s);
    const double sn = 1.0, se = 0.1;
    const MatrixPerCluster w = test::random_square(rng, s);
    const MatrixPerCluster r = update_R(w, f, sn, se);
    CHECK(test::max_fd_gradient(r, [&](const MatrixPerCluster& x) { return sum_mse(w, x, f, sn, se).total; }) < 1e-4);
    const MatrixPerCluster w2 = update_W(r, f, se);
    CHECK(test::max_fd_gradient(w2, [&](const MatrixPerCluster& x) { return sum_mse(x, r, f, sn, se).total; }) < 1e-4);
  }

  TEST_CASE("robust updates reduce to the plain MMSE ones without errors") {
    const Scenario s = test::small_scenario();
    Rng rng = test::test_rng(62);
    const BlockMatrix f = test::random_blocks(rng, s);
    const MatrixPerCluster w = test::random_square(rng, s);
    const MatrixPerCluster r = update_R(w, f, 1.0, 0.0);
    for (int l = 0; l < s.gateways(); ++l) {
      MatrixXcd cov = MatrixXcd::Identity(2, 2);
      for (int i = 0; i < s.gateways(); ++i) cov += f.at(l, i) * w[i] * (f.at(l, i) * w[i]).adjoint();
      const MatrixXcd ref = w[l].adjoint() * f.at(l, l).adjoint() * cov.inverse();
      CHECK((r[l] - ref).norm() <= 1e-10 * (1.0 + ref.norm()));
    }
  }

  TEST_CASE("half-steps never increase the sum MSE") {
    const Scenario s = test::small_scenario();
    for (std::uint64_t t = 0; t < 8; ++t) {
      Rng rng = test::test_rng(70 + t);
      const BlockMatrix f = test::random_blocks(rng, s);
      const FirstStageResult res = run_first_stage(f, s, 0.02 * static_cast<double>(t), random_first_stage(s, 5, t));
      CHECK(res.converged);
      for (std::size_t i = 1; i < res.mse_trace.size(); ++i) CHECK(res.mse_trace[i] <= res.mse_trace[i - 1] + 1e-9);
    }
  }

  TEST_CASE("interference-free feeder decouples the receivers") {
    nlohmann::json j{{"feeds", 6}, {"gateways", 3}, {"delta", 0.0}};
    const Scenario s = build_scenario(j);
    const FeederLinkChannel fl = feeder_channel(s, VectorXcd::Ones(3));
    const FirstStageResult res = run_first_stage(fl.f, s, 0.0, random_first_stage(s, 1, 0));
    REQUIRE(res.converged);
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l) {
        const MatrixXcd& b = res.effective.at(i, l);
        if (i != l) {
          CHECK(b.norm() <= 1e-8);
        } else {
          const cplx c = b.trace() / 2.0;
          CHECK(c.real() > 0.0);
          CHECK((b - c * MatrixXcd::Identity(2, 2)).norm() <= 1e-6 * std::abs(c));
        }
      }
  }

  TEST_CASE("default instance converges within 200 iterations") {
    const Scenario s = build_scenario(nlohmann::json::object());
    const ChannelDraw d = make_channel_draw(s, 0);
    const FirstStageResult res = run_first_stage(d.feeder_estimate, s, d.sigma_e2, random_first_stage(s, s.seed, 0));
    CHECK(res.converged);
    CHECK(res.iterations <= 200);
  }
}
