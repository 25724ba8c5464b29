#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "satrs/subproblem.hpp"
#include "support.hpp"

using namespace satrs;

TEST_SUITE("subproblem") {
  TEST_CASE("default topology counts") {
    const Scenario s = build_scenario(nlohmann::json{{"samples", 2}});
    const auto rp = test::random_subproblem(s, 0, Strategy::rs);
    const ConicProgram& prog = rp.sp.program;
    int precoder_coords = 0;
    for (const auto& b : prog.layout)
      if (b.name.rfind("common", 0) == 0 || b.name.rfind("private", 0) == 0) precoder_coords += b.length;
    CHECK(precoder_coords == 72);
    CHECK(prog.count(ConstraintTag::common_wmse) == 18);
    CHECK(prog.count(ConstraintTag::private_wmse) == 18);
    CHECK(prog.count(ConstraintTag::feed_power) == 9);
    CHECK(prog.block("C_m").length == 9);
    CHECK(prog.block("r_g").length == 1);
  }

  TEST_CASE("single-gateway NoRS counts") {
    nlohmann::json j{{"feeds", 1}, {"gateways", 1}, {"users_per_group", 3}, {"samples", 2}};
    const Scenario s = build_scenario(j);
    const auto rp = test::random_subproblem(s, 0, Strategy::nors);
    const ConicProgram& prog = rp.sp.program;
    CHECK(prog.count(ConstraintTag::private_wmse) == 3);
    CHECK(prog.count(ConstraintTag::common_wmse) == 0);
    CHECK(prog.count(ConstraintTag::feed_power) == 1);
    CHECK(prog.count(ConstraintTag::nonneg_portion) == 0);
    for (const auto& b : prog.layout) CHECK(b.name != "C_m");
    CHECK(rp.sp.layout.c == -1);
  }

  TEST_CASE("every quadratic constraint is convex") {
    const Scenario s = test::small_scenario(2, 3);
    const auto rp = test::random_subproblem(s, 1, Strategy::rs);
    for (const auto& q : rp.sp.program.quadratic) {
      const MatrixXd h = q.factor.transpose() * q.factor;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * (1.0 + h.norm()));
    }
  }

  TEST_CASE("constraint values reproduce the WMSE expressions and power usage") {
    const Scenario s = test::small_scenario(2, 3);
    const ChannelDraw d = make_channel_draw(s, 2);
    const AoInput in = make_ao_input(d, s, PrecoderSet{});
    const PrecoderSet p0 = initialize_precoders(in, s, Strategy::rs);
    const SafTerms saf = build_saf_terms(in.samples, in.sample_noise, p0, s);
    const Subproblem sp = build_program(saf, in.power, s, Strategy::rs);
    Rng rng = test::test_rng(50);
    PrecoderSet q = p0;
    for (auto& v : q.common) v += test::random_vector(rng, v.size(), 0.2);
    for (auto& v : q.priv) v += test::random_vector(rng, v.size(), 0.2);
    const VectorXd x = pack_precoders(sp.layout, q, sp.program.num_vars);
    const VectorXd usage = antenna_power_usage(q, in.power.feeder, s);
    for (const auto& qc : sp.program.quadratic) {
      const double v = qc.value(x);
      if (qc.tag == ConstraintTag::private_wmse)
        CHECK(v + 1.0 == doctest::Approx(private_wmse_expression(saf, q, s, qc.index)).epsilon(1e-9));
      else if (qc.tag == ConstraintTag::common_wmse)
        CHECK(v + 1.0 == doctest::Approx(common_wmse_expression(saf, q, s, qc.index)).epsilon(1e-9));
      else if (qc.tag == ConstraintTag::feed_power)
        CHECK(v + s.feed_power[qc.index] == doctest::Approx(usage(qc.index)).epsilon(1e-9));
    }
  }

  TEST_CASE("vanishing quadratic terms leave affine constraints") {
    const Scenario s = test::small_scenario(1, 1);
    SafTerms saf;
    saf.samples = 1;
    for (int k = 0; k < s.users(); ++k) {
      SafUser su;
      for (int l = 0; l < s.gateways(); ++l) su.psi.push_back(MatrixXcd::Zero(s.cluster_size(l), s.cluster_size(l)));
      su.f = VectorXcd::Zero(s.cluster_size(s.gateway_of_user(k)));
      su.u = 1.0;
      saf.priv.push_back(su);
      saf.common.push_back(su);
    }
    PowerModel pm;
    pm.feeder = BlockMatrix(static_cast<std::size_t>(s.gateways()));
    for (int i = 0; i < s.gateways(); ++i)
      for (int l = 0; l < s.gateways(); ++l)
        pm.feeder.at(i, l) = i == l ? MatrixXcd(MatrixXcd::Identity(2, 2)) : MatrixXcd(MatrixXcd::Zero(2, 2));
    pm.noise_floor = VectorXd::Ones(s.feeds);
    const Subproblem sp = build_program(saf, pm, s, Strategy::rs);
    for (const auto& qc : sp.program.quadratic)
      if (qc.tag != ConstraintTag::feed_power) CHECK(qc.factor.rows() == 0);
  }

  TEST_CASE("solution satisfies the power budget") {
    const Scenario s = test::small_scenario(2, 3);
    const auto rp = test::random_subproblem(s, 3, Strategy::rs);
    const SubproblemResult res = solve_subproblem(rp.sp, PrecoderSet{}, s);
    const VectorXd usage = antenna_power_usage(res.precoders, rp.in.power.feeder, s);
    for (int n = 0; n < s.feeds; ++n) CHECK(usage(n) <= s.feed_power[n] + 1e-6);
    CHECK((res.portions.array() >= -1e-8).all());
    CHECK(res.objective <= (res.group_rate + res.portions).minCoeff() + 1e-8);
  }
}
