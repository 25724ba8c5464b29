#include <doctest.h>

#include <cmath>
#include <sstream>

#include "satrs/ao.hpp"
#include "satrs/harness.hpp"
#include "support.hpp"

using namespace satrs;

namespace {

Scenario single_link(bool perfect) {
  nlohmann::json j{{"feeds", 1}, {"gateways", 1}, {"users_per_group", 1}, {"perfect_csit", perfect}, {"samples", 10}};
  return build_scenario(j);
}

// Matched filtering at full power: the feed usage |F|^2 |p|^2 + sigma^2 meets P.
double single_link_capacity(const AoInput& in, const ChannelDraw& d, const Scenario& s) {
  const double f2 = std::norm(d.feeder.f.at(0, 0)(0, 0));
  const double p2 = (s.feed_power[0] - s.noise_power) / f2;
  return std::log2(1.0 + std::norm(in.truth[0](0, 0)) * p2 / in.truth_noise(0));
}

}  // namespace

TEST_SUITE("ao") {
  TEST_CASE("single user converges to the closed form") {
    const Scenario s = single_link(true);
    const ChannelDraw d = make_channel_draw(s, 0);
    const AoInput in = make_ao_input(d, s, PrecoderSet{});
    CHECK(in.samples.size() == 1);
    const double cap = single_link_capacity(in, d, s);
    for (Strategy st : {Strategy::nors, Strategy::rs}) {
      const AoTrace tr = run_ao(in, s, st);
      CHECK(tr.converged);
      CHECK(tr.iterations <= 3);
      CHECK(tr.realized.mmf == doctest::Approx(cap).epsilon(1e-4));
      CHECK(std::abs(tr.saa_objective - cap) <= 1e-4);
    }
  }

  TEST_CASE("initial direction follows the channel") {
    nlohmann::json j{{"feeds", 2}, {"gateways", 1}, {"users_per_group", 1}, {"samples", 2}};
    const Scenario s = build_scenario(j);
    const AoInput in = make_ao_input(make_channel_draw(s, 0), s, PrecoderSet{});
    const PrecoderSet p = initialize_precoders(in, s, Strategy::nors);
    for (int m = 0; m < 2; ++m) {
      const VectorXcd h = in.estimate[0].col(m);
      CHECK(std::abs(h.normalized().dot(p.priv[m].normalized())) == doctest::Approx(1.0).epsilon(1e-12));
    }

    nlohmann::json k{{"feeds", 2}, {"gateways", 1}, {"group_sizes", {2, 1}}, {"samples", 2}};
    const Scenario s2 = build_scenario(k);
    AoInput twin = make_ao_input(make_channel_draw(s2, 0), s2, PrecoderSet{});
    twin.estimate[0].col(1) = twin.estimate[0].col(0);
    const PrecoderSet q = initialize_precoders(twin, s2, Strategy::nors);
    const VectorXcd h = twin.estimate[0].col(0);
    CHECK(std::abs(h.normalized().dot(q.priv[0].normalized())) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("initialization is feasible on the default topology") {
    const Scenario s = build_scenario(nlohmann::json{{"samples", 3}});
    const AoInput in = make_ao_input(make_channel_draw(s, 0), s, PrecoderSet{});
    for (Strategy st : {Strategy::rs, Strategy::nors}) {
      const PrecoderSet p = initialize_precoders(in, s, st);
      const VectorXd usage = antenna_power_usage(p, in.power.feeder, s);
      for (int n = 0; n < s.feeds; ++n) CHECK(usage(n) <= s.feed_power[n]);
      CHECK(usage.maxCoeff() >= 0.999 * s.feed_power[0]);
    }
  }

  TEST_CASE("objective is monotone and iterates stay feasible") {
    const Scenario s = test::small_scenario(2, 5);
    const AoInput in = make_ao_input(make_channel_draw(s, 1), s, PrecoderSet{});
    const AoTrace tr = run_ao(in, s, Strategy::rs);
    CHECK(tr.converged);
    for (std::size_t i = 1; i < tr.objective.size(); ++i) CHECK(tr.objective[i] >= tr.objective[i - 1] - 1e-9);
    for (double e : tr.power_excess) CHECK(e <= 1e-6);
    std::ostringstream os;
    write_trace_csv(os, tr);
    CHECK(os.str().rfind("iteration,objective,power_excess\n", 0) == 0);
  }

  TEST_CASE("infeasible noise floor is reported") {
    nlohmann::json j{{"feeds", 1}, {"gateways", 1}, {"users_per_group", 1}, {"per_feed_power_w", 0.5}};
    const Scenario s = build_scenario(j);
    const AoInput in = make_ao_input(make_channel_draw(s, 0), s, PrecoderSet{});
    CHECK_THROWS(initialize_precoders(in, s, Strategy::nors));
  }

  TEST_CASE("single gateway under perfect CSIT: RS at least NoRS") {
    nlohmann::json j{{"feeds", 3}, {"gateways", 1}, {"delta", 0.0}, {"perfect_csit", true}};
    const Scenario s = build_scenario(j);
    for (std::uint64_t t = 0; t < 3; ++t) {
      const auto out = run_trial(s, t, {{Strategy::rs, false}, {Strategy::nors, false}});
      REQUIRE(out[0].ok);
      REQUIRE(out[1].ok);
      CHECK(out[0].mmf >= out[1].mmf - 1e-6);
      CHECK(out[0].saa_objective >= out[1].saa_objective - 1e-6);
    }
  }
}
