// SPDX-License-Identifier: Apache-2.0
#include "satrs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "satrs/error.hpp"
#include "satrs/rng.hpp"

namespace satrs {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (j.contains(key) && !j.at(key).is_null()) return j.at(key).get<T>();
  return fallback;
}

AnglePoint uniform_in_disk(Rng& rng, const AnglePoint& center, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double phi = 2.0 * std::numbers::pi * u(rng);
  return {center[0] + r * std::cos(phi), center[1] + r * std::sin(phi)};
}

RfParameters parse_rf(const nlohmann::json& j) {
  RfParameters rf;
  if (!j.is_object()) return rf;
  rf.carrier_hz = get_or(j, "carrier_hz", rf.carrier_hz);
  rf.height_m = get_or(j, "height_m", rf.height_m);
  rf.bandwidth_hz = get_or(j, "bandwidth_hz", rf.bandwidth_hz);
  if (j.contains("theta_3db_rad"))
    rf.theta_3db_rad = j.at("theta_3db_rad").get<double>();
  else if (j.contains("theta_3db_deg"))
    rf.theta_3db_rad = deg2rad(j.at("theta_3db_deg").get<double>());
  rf.gmax_dbi = get_or(j, "gmax_dbi", rf.gmax_dbi);
  rf.gr_dbi = get_or(j, "gr_dbi", rf.gr_dbi);
  rf.tsys_k = get_or(j, "tsys_k", rf.tsys_k);
  rf.rain_mu = get_or(j, "rain_mu", rf.rain_mu);
  rf.rain_sigma = get_or(j, "rain_sigma", rf.rain_sigma);
  return rf;
}

std::vector<AnglePoint> parse_points(const nlohmann::json& j) {
  std::vector<AnglePoint> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2)
      throw Error(ErrorCode::invalid_config, "angular points must be [x, y] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

}  // namespace

double RfParameters::wavelength_m() const { return kSpeedOfLight / carrier_hz; }

std::vector<int> Scenario::users_of_group(int m) const {
  std::vector<int> out;
  for (int k = 0; k < users(); ++k)
    if (user_to_group[k] == m) out.push_back(k);
  return out;
}

std::vector<int> Scenario::groups_of_gateway(int l) const {
  std::vector<int> out;
  for (int m = 0; m < groups(); ++m)
    if (group_to_gateway[m] == l) out.push_back(m);
  return out;
}

std::vector<int> Scenario::users_of_gateway(int l) const {
  std::vector<int> out;
  for (int k = 0; k < users(); ++k)
    if (gateway_of_user(k) == l) out.push_back(k);
  return out;
}

int Scenario::gateway_of_feed(int n) const {
  for (int l = 0; l < gateways(); ++l) {
    const auto& c = clusters[l];
    if (std::find(c.begin(), c.end(), n) != c.end()) return l;
  }
  throw Error(ErrorCode::not_in_cluster, "feed " + std::to_string(n) + " is in no cluster");
}

double Scenario::csit_error_variance() const {
  if (perfect_csit) return 0.0;
  return std::pow(total_power, -alpha);
}

int feed_local_index(const Scenario& s, int n, int l) {
  if (l < 0 || l >= s.gateways())
    throw Error(ErrorCode::not_in_cluster, "gateway " + std::to_string(l) + " does not exist");
  const auto& c = s.clusters[l];
  const auto it = std::find(c.begin(), c.end(), n);
  if (it == c.end())
    throw Error(ErrorCode::not_in_cluster,
                "feed " + std::to_string(n) + " not in cluster " + std::to_string(l));
  return static_cast<int>(it - c.begin());
}

std::vector<AnglePoint> default_beam_layout(int feeds, double pitch_rad) {
  const int per_row = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(feeds)))));
  std::vector<AnglePoint> out;
  out.reserve(feeds);
  for (int n = 0; n < feeds; ++n) {
    const int row = n / per_row;
    const int col = n % per_row;
    const double x = (col + 0.5 * (row % 2)) * pitch_rad;
    const double y = row * pitch_rad * std::sqrt(3.0) / 2.0;
    out.push_back({x, y});
  }
  return out;
}

void validate(const Scenario& s) {
  if (s.feeds < 1) throw Error(ErrorCode::invalid_config, "at least one feed is required");
  if (s.clusters.empty()) throw Error(ErrorCode::invalid_partition, "no clusters");

  std::set<int> seen;
  std::size_t total = 0;
  for (std::size_t l = 0; l < s.clusters.size(); ++l) {
    if (s.clusters[l].empty())
      throw Error(ErrorCode::invalid_partition, "cluster " + std::to_string(l) + " is empty");
    for (int n : s.clusters[l]) {
      if (n < 0 || n >= s.feeds)
        throw Error(ErrorCode::invalid_partition, "feed id " + std::to_string(n) + " out of range");
      if (!seen.insert(n).second)
        throw Error(ErrorCode::invalid_partition,
                    "feed " + std::to_string(n) + " belongs to more than one cluster");
    }
    total += s.clusters[l].size();
  }
  if (total != static_cast<std::size_t>(s.feeds))
    throw Error(ErrorCode::invalid_partition, "clusters do not cover every feed");

  if (s.groups() != s.feeds)
    throw Error(ErrorCode::invalid_mapping, "one multicast group per beam is required");
  if (static_cast<int>(s.group_to_gateway.size()) != s.groups())
    throw Error(ErrorCode::invalid_mapping, "group-to-gateway map has wrong length");
  for (int m = 0; m < s.groups(); ++m) {
    const int l = s.group_to_gateway[m];
    if (l < 0 || l >= s.gateways())
      throw Error(ErrorCode::invalid_mapping, "group " + std::to_string(m) + " served by no gateway");
  }
  for (int l = 0; l < s.gateways(); ++l)
    if (s.groups_of_gateway(l).empty())
      throw Error(ErrorCode::invalid_mapping, "gateway " + std::to_string(l) + " serves no group");

  std::vector<int> counts(s.groups(), 0);
  for (int k = 0; k < s.users(); ++k) {
    const int m = s.user_to_group[k];
    if (m < 0 || m >= s.groups())
      throw Error(ErrorCode::invalid_mapping, "user " + std::to_string(k) + " is in no group");
    ++counts[m];
  }
  for (int m = 0; m < s.groups(); ++m) {
    if (s.group_sizes[m] < 1)
      throw Error(ErrorCode::invalid_mapping, "group " + std::to_string(m) + " has no users");
    if (counts[m] != s.group_sizes[m])
      throw Error(ErrorCode::invalid_mapping, "group sizes disagree with the user-to-group map");
  }

  if (!(s.total_power > 0.0)) throw Error(ErrorCode::non_positive_power, "total power must be > 0");
  if (static_cast<int>(s.feed_power.size()) != s.feeds)
    throw Error(ErrorCode::invalid_config, "one power limit per feed is required");
  for (double p : s.feed_power)
    if (!(p > 0.0)) throw Error(ErrorCode::non_positive_power, "per-feed power limits must be > 0");
  if (!(s.noise_power > 0.0)) throw Error(ErrorCode::invalid_config, "noise power must be > 0");
  if (!(s.alpha >= 0.0 && s.alpha <= 1.0))
    throw Error(ErrorCode::invalid_config, "alpha must lie in [0, 1]");
  if (!(s.delta >= 0.0)) throw Error(ErrorCode::invalid_config, "delta must be >= 0");
  if (s.samples < 1) throw Error(ErrorCode::invalid_config, "SAA sample count must be >= 1");
  if (!(s.rf.theta_3db_rad > 0.0)) throw Error(ErrorCode::invalid_config, "theta_3dB must be > 0");
  if (static_cast<int>(s.beam_centers.size()) != s.feeds)
    throw Error(ErrorCode::invalid_config, "one beam center per feed is required");
  if (static_cast<int>(s.user_positions.size()) != s.users())
    throw Error(ErrorCode::invalid_config, "one position per user is required");
}

Scenario build_scenario(const nlohmann::json& config) {
  if (!config.is_object()) throw Error(ErrorCode::invalid_config, "scenario must be an object");
  Scenario s;

  s.feeds = get_or(config, "feeds", 9);

  if (config.contains("clusters")) {
    s.clusters = config.at("clusters").get<std::vector<std::vector<int>>>();
  } else {
    std::vector<int> sizes;
    if (config.contains("cluster_sizes")) {
      sizes = config.at("cluster_sizes").get<std::vector<int>>();
    } else {
      const int gateways = get_or(config, "gateways", 3);
      if (gateways < 1 || s.feeds % gateways != 0)
        throw Error(ErrorCode::invalid_partition, "feeds must split evenly over gateways");
      sizes.assign(gateways, s.feeds / gateways);
    }
    int next = 0;
    for (int size : sizes) {
      if (size < 1) throw Error(ErrorCode::invalid_partition, "cluster sizes must be >= 1");
      std::vector<int> c(size);
      for (int& n : c) n = next++;
      s.clusters.push_back(std::move(c));
    }
  }

  if (config.contains("user_to_group")) {
    s.user_to_group = config.at("user_to_group").get<std::vector<int>>();
    if (config.contains("group_sizes")) {
      s.group_sizes = config.at("group_sizes").get<std::vector<int>>();
    } else {
      s.group_sizes.assign(s.feeds, 0);
      for (int m : s.user_to_group)
        if (m >= 0 && m < s.feeds) ++s.group_sizes[m];
    }
  } else {
    if (config.contains("group_sizes")) {
      s.group_sizes = config.at("group_sizes").get<std::vector<int>>();
    } else {
      s.group_sizes.assign(s.feeds, get_or(config, "users_per_group", 2));
    }
    for (std::size_t m = 0; m < s.group_sizes.size(); ++m)
      for (int i = 0; i < s.group_sizes[m]; ++i) s.user_to_group.push_back(static_cast<int>(m));
  }

  if (config.contains("group_to_gateway")) {
    s.group_to_gateway = config.at("group_to_gateway").get<std::vector<int>>();
  } else {
    s.group_to_gateway.assign(s.group_sizes.size(), -1);
    for (std::size_t l = 0; l < s.clusters.size(); ++l)
      for (int n : s.clusters[l])
        if (n >= 0 && n < static_cast<int>(s.group_to_gateway.size()))
          s.group_to_gateway[n] = static_cast<int>(l);
  }

  if (config.contains("feed_power_w")) {
    s.feed_power = config.at("feed_power_w").get<std::vector<double>>();
    double sum = 0.0;
    for (double p : s.feed_power) sum += p;
    s.total_power = get_or(config, "total_power_w", sum);
  } else if (config.contains("total_power_w")) {
    s.total_power = config.at("total_power_w").get<double>();
    s.feed_power.assign(s.feeds, s.total_power / s.feeds);
  } else {
    const double per_feed = get_or(config, "per_feed_power_w", 80.0);
    s.total_power = per_feed * s.feeds;
    s.feed_power.assign(s.feeds, per_feed);
  }

  s.noise_power = get_or(config, "noise_power", 1.0);
  s.alpha = get_or(config, "alpha", 0.6);
  s.delta = get_or(config, "delta", 0.8);
  s.samples = get_or(config, "samples", 50);
  s.perfect_csit = get_or(config, "perfect_csit", false);
  s.seed = get_or<std::uint64_t>(config, "seed", 1);
  if (config.contains("rf")) s.rf = parse_rf(config.at("rf"));

  if (config.contains("beam_centers")) {
    s.beam_centers = parse_points(config.at("beam_centers"));
  } else {
    const double pitch = config.contains("beam_pitch_deg")
                             ? deg2rad(config.at("beam_pitch_deg").get<double>())
                             : 2.0 * s.rf.theta_3db_rad;
    s.beam_centers = default_beam_layout(s.feeds, pitch);
  }

  if (config.contains("user_positions")) {
    s.user_positions = parse_points(config.at("user_positions"));
    s.placement = Placement::fixed;
  } else if (static_cast<int>(s.beam_centers.size()) == s.feeds) {
    Rng rng = make_stream(s.seed, 0, StreamPurpose::scenario_layout);
    for (int m : s.user_to_group) {
      if (m < 0 || m >= s.feeds) break;  // rejected by validate() below
      s.user_positions.push_back(uniform_in_disk(rng, s.beam_centers[m], s.rf.theta_3db_rad));
    }
  }
  if (config.contains("placement")) {
    const auto p = config.at("placement").get<std::string>();
    if (p == "fixed")
      s.placement = Placement::fixed;
    else if (p == "per_trial")
      s.placement = Placement::per_trial;
    else
      throw Error(ErrorCode::invalid_config, "placement must be 'fixed' or 'per_trial'");
  }

  validate(s);
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j;
  j["feeds"] = s.feeds;
  j["clusters"] = s.clusters;
  j["group_sizes"] = s.group_sizes;
  j["user_to_group"] = s.user_to_group;
  j["group_to_gateway"] = s.group_to_gateway;
  j["total_power_w"] = s.total_power;
  j["feed_power_w"] = s.feed_power;
  j["noise_power"] = s.noise_power;
  j["alpha"] = s.alpha;
  j["delta"] = s.delta;
  j["samples"] = s.samples;
  j["perfect_csit"] = s.perfect_csit;
  j["seed"] = s.seed;
  j["rf"] = {
      {"carrier_hz", s.rf.carrier_hz}, {"height_m", s.rf.height_m},
      {"bandwidth_hz", s.rf.bandwidth_hz}, {"theta_3db_rad", s.rf.theta_3db_rad},
      {"gmax_dbi", s.rf.gmax_dbi}, {"gr_dbi", s.rf.gr_dbi},
      {"tsys_k", s.rf.tsys_k}, {"rain_mu", s.rf.rain_mu},
      {"rain_sigma", s.rf.rain_sigma},
  };
  auto points = [](const std::vector<AnglePoint>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({p[0], p[1]});
    return a;
  };
  j["beam_centers"] = points(s.beam_centers);
  j["user_positions"] = points(s.user_positions);
  j["placement"] = s.placement == Placement::fixed ? "fixed" : "per_trial";
  return j;
}

}  // namespace satrs
