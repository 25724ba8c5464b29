// Shared fixtures for the unit tests.
#pragma once

#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "satrs/rng.hpp"
#include "satrs/scenario.hpp"
#include "satrs/types.hpp"

namespace satrs::test {

inline Rng test_rng(std::uint64_t trial) { return make_stream(0x5eed, trial, StreamPurpose::test); }

inline VectorXcd random_vector(Rng& rng, Eigen::Index n, double var = 1.0) {
  return complex_normal_matrix(rng, n, 1, var);
}

inline BlockMatrix random_blocks(Rng& rng, const Scenario& s, double var = 1.0) {
  BlockMatrix f(static_cast<std::size_t>(s.gateways()));
  for (int i = 0; i < s.gateways(); ++i)
    for (int l = 0; l < s.gateways(); ++l) f.at(i, l) = complex_normal_matrix(rng, s.cluster_size(i), s.cluster_size(l), var);
  return f;
}

inline UserLinkBlocks random_user_link(Rng& rng, const Scenario& s, double var = 1.0) {
  UserLinkBlocks h;
  for (int l = 0; l < s.gateways(); ++l) h.push_back(complex_normal_matrix(rng, s.cluster_size(l), s.users(), var));
  return h;
}

inline MatrixPerCluster random_square(Rng& rng, const Scenario& s, double var = 1.0) {
  MatrixPerCluster m;
  for (int l = 0; l < s.gateways(); ++l) m.push_back(complex_normal_matrix(rng, s.cluster_size(l), s.cluster_size(l), var));
  return m;
}

/// Small topology: 4 feeds, 2 gateways with 2 feeds each, `rho` users per group.
inline Scenario small_scenario(int rho = 2, int samples = 5) {
  nlohmann::json j;
  j["feeds"] = 4;
  j["gateways"] = 2;
  j["users_per_group"] = rho;
  j["samples"] = samples;
  j["per_feed_power_w"] = 20.0;
  return build_scenario(j);
}

}  // namespace satrs::test
