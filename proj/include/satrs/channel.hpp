// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "satrs/rng.hpp"
#include "satrs/scenario.hpp"
#include "satrs/types.hpp"

namespace satrs {

/// Bessel beam-pattern bracket J1(u)/(2u) + 36 J3(u)/u^3, equal to 1 at u = 0.
double beam_pattern_bracket(double u);

/// Satellite beam gain (linear) at off-axis angle theta.
/// G_max [J1(u)/(2u) + 36 J3(u)/u^3]^2 with u = 2.07123 sin(theta)/sin(theta_3dB).
double beam_gain(double theta, double gmax_linear, double theta_3db);

/// Noise-normalized link gain b_{n,l,k} for every feed of cluster l, for a user
/// at the given angular position. The denominator folds in kT B_w so that the
/// downstream terminal noise power is 1.
VectorXd user_link_gain(const Scenario& s, const AnglePoint& user, int cluster);
/// Same, using the scenario's stored position of user k.
VectorXd user_link_gain(const Scenario& s, int user, int cluster);

/// One draw of the rain-fading scalar chi^(-1/2) e^(-j phi), with
/// ln(chi_dB) ~ N(mu, sigma^2) and phi ~ U[0, 2 pi).
cplx rain_fading(const RfParameters& rf, Rng& rng);

struct UserLinkChannel {
  UserLinkBlocks h;            ///< block l: B_l x K
  std::vector<MatrixXd> gain;  ///< block l: b_{l,k} as columns
  VectorXcd fading;            ///< q_k, shared by every feed of every cluster
};

struct FeederLinkChannel {
  BlockMatrix f;     ///< F_{i,l} = q_l E_{i,l}
  VectorXcd fading;  ///< q_l per gateway
};

/// Deterministic assembly from given gains and fading (h = b o q 1).
UserLinkChannel assemble_user_channel(const Scenario& s, const std::vector<AnglePoint>& users,
                                      const VectorXcd& fading);
/// Draws fading for every user from rng and assembles the channel.
UserLinkChannel assemble_user_channel(const Scenario& s, const std::vector<AnglePoint>& users,
                                      Rng& rng);

/// F_{i,l} = q_l (I if i == l, delta 1 1^T otherwise).
FeederLinkChannel feeder_channel(const Scenario& s, const VectorXcd& gateway_fading);
FeederLinkChannel feeder_channel(const Scenario& s, Rng& rng);

/// True channels, their estimates and the SAA realization sets for one trial.
struct ChannelDraw {
  std::vector<AnglePoint> user_positions;
  UserLinkChannel user;
  FeederLinkChannel feeder;
  UserLinkBlocks user_estimate;
  BlockMatrix feeder_estimate;
  std::vector<UserLinkBlocks> user_samples;
  std::vector<BlockMatrix> feeder_samples;
  double sigma_e2 = 0.0;
};

/// Draws everything for trial `trial` from streams derived off the scenario
/// seed, so the result depends only on (scenario, trial).
ChannelDraw make_channel_draw(const Scenario& s, std::uint64_t trial);

/// Users placed uniformly inside their beam's 3 dB footprint.
std::vector<AnglePoint> place_users(const Scenario& s, Rng& rng);

/// Plain-text dump: a header line per matrix ("<name> <rows> <cols>") followed
/// by one row per line of "re im" pairs, full precision.
void write_channel_dump(std::ostream& os, const Scenario& s, const ChannelDraw& draw);

}  // namespace satrs
