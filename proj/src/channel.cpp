// SPDX-License-Identifier: Apache-2.0
#include "satrs/channel.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>

#include "satrs/error.hpp"

namespace satrs {

namespace {

constexpr double kBoltzmann = 1.380649e-23;
constexpr double kBeamConstant = 2.07123;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double angular_distance(const AnglePoint& a, const AnglePoint& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

void dump_matrix(std::ostream& os, const std::string& name, const MatrixXcd& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << m(r, c).real() << ' ' << m(r, c).imag();
    }
    os << '\n';
  }
}

}  // namespace

double beam_pattern_bracket(double u) {
  u = std::abs(u);
  // Series of both terms about 0: 1/4 - u^2/32 and 3/4 - 3u^2/64.
  if (u < 1e-4) return 1.0 - 5.0 * u * u / 64.0;
  return std::cyl_bessel_j(1.0, u) / (2.0 * u) + 36.0 * std::cyl_bessel_j(3.0, u) / (u * u * u);
}

double beam_gain(double theta, double gmax_linear, double theta_3db) {
  const double u = kBeamConstant * std::sin(theta) / std::sin(theta_3db);
  const double bracket = beam_pattern_bracket(u);
  return gmax_linear * bracket * bracket;
}

VectorXd user_link_gain(const Scenario& s, const AnglePoint& user, int cluster) {
  const auto& feeds = s.clusters.at(cluster);
  const double gr = db_to_linear(s.rf.gr_dbi);
  const double gmax = db_to_linear(s.rf.gmax_dbi);
  const double distance = s.rf.height_m;
  const double denom = 4.0 * std::numbers::pi * (distance / s.rf.wavelength_m()) *
                       std::sqrt(kBoltzmann * s.rf.tsys_k * s.rf.bandwidth_hz);
  VectorXd b(feeds.size());
  for (std::size_t i = 0; i < feeds.size(); ++i) {
    const double theta = angular_distance(s.beam_centers.at(feeds[i]), user);
    b(static_cast<Eigen::Index>(i)) = std::sqrt(gr * beam_gain(theta, gmax, s.rf.theta_3db_rad)) / denom;
  }
  return b;
}

VectorXd user_link_gain(const Scenario& s, int user, int cluster) {
  return user_link_gain(s, s.user_positions.at(user), cluster);
}

cplx rain_fading(const RfParameters& rf, Rng& rng) {
  std::normal_distribution<double> ln_chi_db(rf.rain_mu, rf.rain_sigma);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double chi_db = std::exp(ln_chi_db(rng));
  const double chi = std::pow(10.0, chi_db / 20.0);
  const double phi = phase(rng);
  return std::polar(1.0 / std::sqrt(chi), -phi);
}

std::vector<AnglePoint> place_users(const Scenario& s, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AnglePoint> out;
  out.reserve(s.users());
  for (int k = 0; k < s.users(); ++k) {
    const auto& c = s.beam_centers.at(s.user_to_group[k]);
    const double r = s.rf.theta_3db_rad * std::sqrt(u(rng));
    const double phi = 2.0 * std::numbers::pi * u(rng);
    out.push_back({c[0] + r * std::cos(phi), c[1] + r * std::sin(phi)});
  }
  return out;
}

UserLinkChannel assemble_user_channel(const Scenario& s, const std::vector<AnglePoint>& users,
                                      const VectorXcd& fading) {
  const int K = s.users();
  if (static_cast<int>(users.size()) != K || fading.size() != K)
    throw Error(ErrorCode::dimension_mismatch, "one position and one fading value per user");
  UserLinkChannel ch;
  ch.fading = fading;
  for (int l = 0; l < s.gateways(); ++l) {
    MatrixXd b(s.cluster_size(l), K);
    for (int k = 0; k < K; ++k) b.col(k) = user_link_gain(s, users[k], l);
    MatrixXcd h = b.cast<cplx>();
    for (int k = 0; k < K; ++k) h.col(k) *= fading(k);
    ch.gain.push_back(std::move(b));
    ch.h.push_back(std::move(h));
  }
  return ch;
}

UserLinkChannel assemble_user_channel(const Scenario& s, const std::vector<AnglePoint>& users,
                                      Rng& rng) {
  VectorXcd q(s.users());
  for (int k = 0; k < s.users(); ++k) q(k) = rain_fading(s.rf, rng);
  return assemble_user_channel(s, users, q);
}

FeederLinkChannel feeder_channel(const Scenario& s, const VectorXcd& gateway_fading) {
  const int L = s.gateways();
  if (gateway_fading.size() != L)
    throw Error(ErrorCode::dimension_mismatch, "one feeder fading value per gateway");
  FeederLinkChannel fc;
  fc.fading = gateway_fading;
  fc.f = BlockMatrix(L);
  for (int i = 0; i < L; ++i) {
    for (int l = 0; l < L; ++l) {
      const int bi = s.cluster_size(i);
      const int bl = s.cluster_size(l);
      const MatrixXcd e = (i == l) ? MatrixXcd(MatrixXcd::Identity(bi, bl))
                                   : MatrixXcd(MatrixXcd::Constant(bi, bl, cplx(s.delta, 0.0)));
      fc.f.at(i, l) = gateway_fading(l) * e;
    }
  }
  return fc;
}

FeederLinkChannel feeder_channel(const Scenario& s, Rng& rng) {
  VectorXcd q(s.gateways());
  for (int l = 0; l < s.gateways(); ++l) q(l) = rain_fading(s.rf, rng);
  return feeder_channel(s, q);
}

ChannelDraw make_channel_draw(const Scenario& s, std::uint64_t trial) {
  ChannelDraw d;
  if (s.placement == Placement::per_trial) {
    Rng pos = make_stream(s.seed, trial, StreamPurpose::user_positions);
    d.user_positions = place_users(s, pos);
  } else {
    d.user_positions = s.user_positions;
  }
  Rng user_rng = make_stream(s.seed, trial, StreamPurpose::user_fading);
  Rng feeder_rng = make_stream(s.seed, trial, StreamPurpose::feeder_fading);
  d.user = assemble_user_channel(s, d.user_positions, user_rng);
  d.feeder = feeder_channel(s, feeder_rng);
  d.sigma_e2 = s.csit_error_variance();

  const int L = s.gateways();
  const int K = s.users();
  d.user_estimate = d.user.h;
  d.feeder_estimate = d.feeder.f;
  if (d.sigma_e2 > 0.0) {
    Rng err = make_stream(s.seed, trial, StreamPurpose::csit_error);
    for (int l = 0; l < L; ++l)
      d.user_estimate[l] -= complex_normal_matrix(err, s.cluster_size(l), K, d.sigma_e2);
    for (int i = 0; i < L; ++i)
      for (int l = 0; l < L; ++l)
        d.feeder_estimate.at(i, l) -=
            complex_normal_matrix(err, s.cluster_size(i), s.cluster_size(l), d.sigma_e2);
  }

  Rng saa = make_stream(s.seed, trial, StreamPurpose::saa_samples);
  d.user_samples.reserve(s.samples);
  d.feeder_samples.reserve(s.samples);
  for (int n = 0; n < s.samples; ++n) {
    UserLinkBlocks h = d.user_estimate;
    BlockMatrix f = d.feeder_estimate;
    if (d.sigma_e2 > 0.0) {
      for (int l = 0; l < L; ++l) h[l] += complex_normal_matrix(saa, s.cluster_size(l), K, d.sigma_e2);
      for (int i = 0; i < L; ++i)
        for (int l = 0; l < L; ++l)
          f.at(i, l) += complex_normal_matrix(saa, s.cluster_size(i), s.cluster_size(l), d.sigma_e2);
    }
    d.user_samples.push_back(std::move(h));
    d.feeder_samples.push_back(std::move(f));
  }
  return d;
}

void write_channel_dump(std::ostream& os, const Scenario& s, const ChannelDraw& draw) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  os << "# satrs channel dump v1\n";
  os << "sigma_e2 " << draw.sigma_e2 << '\n';
  const int L = s.gateways();
  for (int l = 0; l < L; ++l) dump_matrix(os, "H[" + std::to_string(l) + "]", draw.user.h[l]);
  for (int l = 0; l < L; ++l) dump_matrix(os, "Hhat[" + std::to_string(l) + "]", draw.user_estimate[l]);
  for (int i = 0; i < L; ++i)
    for (int l = 0; l < L; ++l)
      dump_matrix(os, "F[" + std::to_string(i) + "," + std::to_string(l) + "]", draw.feeder.f.at(i, l));
  for (int i = 0; i < L; ++i)
    for (int l = 0; l < L; ++l)
      dump_matrix(os, "Fhat[" + std::to_string(i) + "," + std::to_string(l) + "]",
                  draw.feeder_estimate.at(i, l));
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace satrs
