#include <doctest.h>

#include "satrs/error.hpp"
#include "satrs/scenario.hpp"

using namespace satrs;

TEST_SUITE("scenario") {
  TEST_CASE("default topology has 18 users in 9 groups") {
    const Scenario s = build_scenario(nlohmann::json::object());
    CHECK(s.feeds == 9);
    CHECK(s.gateways() == 3);
    CHECK(s.groups() == 9);
    CHECK(s.users() == 18);
    for (int l = 0; l < 3; ++l) CHECK(s.cluster_size(l) == 3);
    CHECK(s.total_power == doctest::Approx(720.0));
  }

  TEST_CASE("minimal topology") {
    nlohmann::json j{{"feeds", 1}, {"gateways", 1}, {"users_per_group", 1}};
    const Scenario s = build_scenario(j);
    CHECK(s.users() == 1);
    CHECK(s.groups() == 1);
    CHECK(s.gateways() == 1);
  }

  TEST_CASE("overlapping clusters are rejected") {
    nlohmann::json j{{"feeds", 4}, {"clusters", {{0, 1}, {1, 2, 3}}}};
    try {
      build_scenario(j);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_partition);
    }
  }

  TEST_CASE("feed_local_index") {
    nlohmann::json j{{"feeds", 6}, {"clusters", {{0, 1, 2}, {3, 4, 5}}}};
    const Scenario s = build_scenario(j);
    CHECK(feed_local_index(s, 4, 1) == 1);
    CHECK(feed_local_index(s, 0, 0) == 0);
    CHECK_THROWS_AS(feed_local_index(s, 5, 0), Error);
    try {
      feed_local_index(s, 5, 0);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_in_cluster);
    }
  }

  TEST_CASE("invalid values") {
    CHECK_THROWS_AS(build_scenario(nlohmann::json{{"alpha", 1.5}}), Error);
    CHECK_THROWS_AS(build_scenario(nlohmann::json{{"per_feed_power_w", 0.0}}), Error);
    CHECK_THROWS_AS(build_scenario(nlohmann::json{{"samples", 0}}), Error);
  }

  TEST_CASE("round trip through json") {
    nlohmann::json j{{"feeds", 4}, {"gateways", 2}, {"group_sizes", {1, 2, 1, 3}}, {"delta", 0.3}};
    const Scenario s = build_scenario(j);
    const Scenario t = build_scenario(to_json(s));
    CHECK(to_json(t) == to_json(s));
    CHECK(t.group_sizes == s.group_sizes);
    CHECK(t.user_to_group == s.user_to_group);
  }

  TEST_CASE("csit error variance") {
    const Scenario s = build_scenario(nlohmann::json::object());
    CHECK(s.csit_error_variance() == doctest::Approx(std::pow(720.0, -0.6)));
    const Scenario p = build_scenario(nlohmann::json{{"perfect_csit", true}});
    CHECK(p.csit_error_variance() == 0.0);
  }
}
