// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace satrs {

/// Physical constants of the user link. Defaults are the Ka-band GEO values
/// used throughout the simulations.
struct RfParameters {
  double carrier_hz = 20e9;
  double height_m = 35786e3;
  double bandwidth_hz = 500e6;
  double theta_3db_rad = 0.4 * 3.14159265358979323846 / 180.0;
  double gmax_dbi = 52.0;
  double gr_dbi = 41.7;
  double tsys_k = 517.0;
  double rain_mu = -3.125;
  double rain_sigma = 1.591;

  double wavelength_m() const;
};

/// Small-angle coordinates (radians) in the satellite's angular plane.
using AnglePoint = std::array<double, 2>;

enum class Placement {
  per_trial,  ///< users re-drawn inside their beam footprint for every trial
  fixed,      ///< user_positions used as given
};

/// Whole-system description. Immutable after build_scenario(); all indices
/// are 0-based.
struct Scenario {
  int feeds = 0;
  std::vector<std::vector<int>> clusters;  ///< B_l: ordered global feed ids per gateway
  std::vector<int> group_sizes;            ///< G_m, one group per beam
  std::vector<int> user_to_group;          ///< mu
  std::vector<int> group_to_gateway;       ///< lambda

  double total_power = 0.0;          ///< P, Watts
  std::vector<double> feed_power;    ///< P_n, Watts
  double noise_power = 1.0;          ///< sigma_n^2 after link-budget normalization
  double alpha = 0.6;                ///< CSIT quality exponent
  double delta = 0.8;                ///< feeder-link interference level
  int samples = 50;                  ///< SAA sample count S
  bool perfect_csit = false;

  RfParameters rf;
  std::vector<AnglePoint> beam_centers;
  std::vector<AnglePoint> user_positions;
  Placement placement = Placement::per_trial;
  std::uint64_t seed = 1;

  int users() const { return static_cast<int>(user_to_group.size()); }
  int gateways() const { return static_cast<int>(clusters.size()); }
  int groups() const { return static_cast<int>(group_sizes.size()); }
  int cluster_size(int l) const { return static_cast<int>(clusters.at(l).size()); }

  int gateway_of_user(int k) const { return group_to_gateway.at(user_to_group.at(k)); }
  std::vector<int> users_of_group(int m) const;
  std::vector<int> groups_of_gateway(int l) const;
  std::vector<int> users_of_gateway(int l) const;
  /// Gateway whose cluster contains global feed n.
  int gateway_of_feed(int n) const;

  /// sigma_e^2 = P^(-alpha); zero under perfect CSIT.
  double csit_error_variance() const;
};

/// Position of feed n inside the ordered cluster B_l (0-based).
/// Throws Error(not_in_cluster) if n is not in B_l.
int feed_local_index(const Scenario& s, int n, int l);

/// Builds and validates a Scenario from its parsed file form. Missing fields
/// take the default system parameters; per-feed limits default to P/N.
Scenario build_scenario(const nlohmann::json& config);

/// Serializes every field so that build_scenario(to_json(s)) == s.
nlohmann::json to_json(const Scenario& s);

/// Checks every structural invariant; throws Error on the first violation.
void validate(const Scenario& s);

/// Default hexagonal beam layout: rows of beams with the given pitch.
std::vector<AnglePoint> default_beam_layout(int feeds, double pitch_rad);

}  // namespace satrs
