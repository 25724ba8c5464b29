// SPDX-License-Identifier: Apache-2.0
#include "satrs/ao.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include "satrs/error.hpp"
#include "satrs/wmmse.hpp"

namespace satrs {

AoInput make_ao_input(const ChannelDraw& draw, const Scenario& s, const PrecoderSet& stage_template) {
  AoInput in;
  in.stage = stage_template;
  in.stage.common.clear();
  in.stage.priv.clear();
  const bool two = stage_template.stage == Stage::two_stage;
  const MatrixPerCluster& r = two ? stage_template.obp_filter : MatrixPerCluster{};
  const MatrixPerCluster& w = two ? stage_template.first_stage : MatrixPerCluster{};
  const std::size_t n = draw.sigma_e2 > 0.0 ? draw.user_samples.size() : std::min<std::size_t>(1, draw.user_samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    const BlockMatrix& f = two ? draw.feeder_estimate : draw.feeder_samples[i];
    in.samples.push_back(effective_channel(draw.user_samples[i], f, r, w));
    in.sample_noise.push_back(effective_noise(draw.user_samples[i], r, s.noise_power));
  }
  in.estimate = effective_channel(draw.user_estimate, draw.feeder_estimate, r, w);
  in.truth = effective_channel(draw.user.h, draw.feeder.f, r, w);
  in.truth_noise = effective_noise(draw.user.h, r, s.noise_power);
  in.power = make_power_model(draw.feeder_estimate, in.stage, s);
  return in;
}

namespace {

VectorXcd dominant_direction(const MatrixXcd& cols) {
  Eigen::JacobiSVD<MatrixXcd> svd(cols, Eigen::ComputeThinU);
  return svd.matrixU().col(0);
}

MatrixXcd gather(const MatrixXcd& hbar, const std::vector<int>& users) {
  MatrixXcd out(hbar.rows(), static_cast<Eigen::Index>(users.size()));
  for (std::size_t i = 0; i < users.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = hbar.col(users[i]);
  return out;
}

double max_power_excess(const PrecoderSet& p, const PowerModel& pm, const Scenario& s) {
  const VectorXd usage = antenna_power_usage(p, pm.feeder, s);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < s.feeds; ++n) worst = std::max(worst, usage(n) - s.feed_power[n]);
  return worst;
}

}  // namespace

PrecoderSet initialize_precoders(const AoInput& in, const Scenario& s, Strategy strategy) {
  PrecoderSet p = in.stage;
  p.strategy = strategy;
  if (strategy == Strategy::rs)
    for (int l = 0; l < s.gateways(); ++l)
      p.common.push_back(dominant_direction(gather(in.estimate[l], s.users_of_gateway(l))));
  for (int m = 0; m < s.groups(); ++m)
    p.priv.push_back(dominant_direction(gather(in.estimate[s.group_to_gateway[m]], s.users_of_group(m))));

  // Usage is noise_n + s^2 quad_n; pick the largest s keeping every feed within P_n.
  const VectorXd floor = feeder_noise_floor(p, s);
  const VectorXd quad = antenna_power_usage(p, in.power.feeder, s) - floor;
  double scale2 = std::numeric_limits<double>::infinity();
  for (int n = 0; n < s.feeds; ++n) {
    const double room = s.feed_power[n] - floor(n);
    if (room <= 0.0) throw Error(ErrorCode::infeasible, "feeder noise alone exceeds feed " + std::to_string(n) + "'s limit");
    if (quad(n) > 0.0) scale2 = std::min(scale2, room / quad(n));
  }
  if (!std::isfinite(scale2)) scale2 = 1.0;
  const double scale = std::sqrt(scale2) * (1.0 - 1e-12);
  for (auto& v : p.common) v *= scale;
  for (auto& v : p.priv) v *= scale;
  return p;
}

AoTrace run_ao(const AoInput& in, const Scenario& s, Strategy strategy, const AoOptions& opt) {
  return run_ao(in, s, initialize_precoders(in, s, strategy), opt);
}

AoTrace run_ao(const AoInput& in, const Scenario& s, const PrecoderSet& start, const AoOptions& opt) {
  AoTrace tr;
  PrecoderSet p = start;
  double prev = 0.0;
  int stall = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const SafTerms saf = build_saf_terms(in.samples, in.sample_noise, p, s);
    const Subproblem sp = build_program(saf, in.power, s, p.strategy);
    SubproblemResult res;
    try {
      res = solve_subproblem(sp, in.stage, s, opt.solver);
    } catch (const Error& e) {
      throw Error(e.code(), "AO iteration " + std::to_string(it) + ": " + e.what());
    }
    p = res.precoders;
    const double obj = res.objective;
    tr.objective.push_back(obj);
    tr.power_excess.push_back(max_power_excess(p, in.power, s));
    tr.iterations = it;
    tr.final = std::move(res);
    stall = std::abs(obj - prev) <= opt.tol ? stall + 1 : 0;
    prev = obj;
    if (stall >= opt.stall_iterations) {
      tr.converged = true;
      break;
    }
  }
  if (!tr.converged) spdlog::warn("AO stopped at {} iterations without converging", tr.iterations);
  tr.precoders = p;
  tr.saa_objective = tr.objective.empty() ? 0.0 : tr.objective.back();
  const AverageRates avg = saa_average_rates(in.samples, in.sample_noise, p, s);
  tr.saa = aggregate_group_rates(avg.common, avg.priv, p, s, tr.final.portions);
  tr.realized = sinr_and_rates(in.truth, in.truth_noise, p, s);
  return tr;
}

void write_trace_csv(std::ostream& os, const AoTrace& t) {
  os << "iteration,objective,power_excess\n";
  for (std::size_t i = 0; i < t.objective.size(); ++i)
    os << (i + 1) << ',' << t.objective[i] << ',' << t.power_excess[i] << '\n';
}

}  // namespace satrs
