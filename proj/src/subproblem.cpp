// SPDX-License-Identifier: Apache-2.0
#include "satrs/subproblem.hpp"

#include <string>

#include <spdlog/fmt/fmt.h>

#include "satrs/error.hpp"

namespace satrs {

PowerModel make_power_model(const BlockMatrix& feeder_estimate, const PrecoderSet& stage_template,
                            const Scenario& s) {
  PowerModel pm;
  if (stage_template.stage == Stage::two_stage)
    pm.feeder = effective_feeder(feeder_estimate, stage_template.obp_filter, stage_template.first_stage);
  else
    pm.feeder = feeder_estimate;
  pm.noise_floor = feeder_noise_floor(stage_template, s);
  return pm;
}

namespace {

ProgramLayout make_layout(const Scenario& s, Strategy strategy, std::vector<VariableBlock>& blocks) {
  ProgramLayout lay;
  lay.strategy = strategy;
  int off = 0;
  if (strategy == Strategy::rs) {
    for (int l = 0; l < s.gateways(); ++l) {
      lay.common.push_back(off);
      blocks.push_back({"common[" + std::to_string(l) + "]", off, 2 * s.cluster_size(l)});
      off += 2 * s.cluster_size(l);
    }
  }
  for (int m = 0; m < s.groups(); ++m) {
    const int len = 2 * s.cluster_size(s.group_to_gateway[m]);
    lay.priv.push_back(off);
    blocks.push_back({"private[" + std::to_string(m) + "]", off, len});
    off += len;
  }
  lay.rg = off;
  blocks.push_back({"r_g", off, 1});
  off += 1;
  lay.r = off;
  blocks.push_back({"r_m", off, s.groups()});
  off += s.groups();
  if (strategy == Strategy::rs) {
    lay.c = off;
    blocks.push_back({"C_m", off, s.groups()});
    off += s.groups();
  }
  return lay;
}

int num_vars_of(const std::vector<VariableBlock>& blocks) {
  return blocks.empty() ? 0 : blocks.back().offset + blocks.back().length;
}

struct Stream {
  int offset;
  int gateway;
  bool is_common;
  int owner;  // gateway for common, group for private
};

std::vector<Stream> streams_of(const ProgramLayout& lay, const Scenario& s) {
  std::vector<Stream> out;
  for (std::size_t l = 0; l < lay.common.size(); ++l)
    out.push_back({lay.common[l], static_cast<int>(l), true, static_cast<int>(l)});
  for (int m = 0; m < s.groups(); ++m) out.push_back({lay.priv[m], s.group_to_gateway[m], false, m});
  return out;
}

// Quadratic WMSE constraint for one stream of one user; `include` selects the
// streams whose Psi terms appear.
template <typename Include>
QuadraticConstraint wmse_constraint(const SafUser& su, const std::vector<MatrixXd>& factor_per_gateway,
                                    const std::vector<Stream>& streams, Include include, int own_offset,
                                    int n) {
  QuadraticConstraint qc;
  qc.b = VectorXd::Zero(n);
  int rows = 0;
  for (const auto& st : streams)
    if (include(st)) rows += static_cast<int>(factor_per_gateway[st.gateway].rows());
  qc.factor = MatrixXd::Zero(rows, n);
  int r = 0;
  for (const auto& st : streams) {
    if (!include(st)) continue;
    const MatrixXd& f = factor_per_gateway[st.gateway];
    qc.factor.block(r, st.offset, f.rows(), f.cols()) = f;
    r += static_cast<int>(f.rows());
  }
  qc.b.segment(own_offset, 2 * su.f.size()) = -2.0 * lift_vector(su.f);
  qc.c = su.noise + su.u - su.v - 1.0;
  return qc;
}

std::vector<MatrixXd> psi_factors(const SafUser& su) {
  std::vector<MatrixXd> out;
  out.reserve(su.psi.size());
  for (const auto& psi : su.psi) out.push_back(symmetric_factor(lift_matrix(psi)));
  return out;
}

}  // namespace

std::vector<QuadraticConstraint> power_constraints(const PowerModel& power, const Scenario& s,
                                                   const ProgramLayout& layout, int num_vars) {
  const auto streams = streams_of(layout, s);
  std::vector<QuadraticConstraint> out;
  for (int l = 0; l < s.gateways(); ++l) {
    for (int f = 0; f < s.cluster_size(l); ++f) {
      const int feed = s.clusters[l][f];
      QuadraticConstraint qc;
      qc.tag = ConstraintTag::feed_power;
      qc.index = feed;
      qc.factor = MatrixXd::Zero(2 * static_cast<int>(streams.size()), num_vars);
      qc.b = VectorXd::Zero(num_vars);
      qc.c = power.noise_floor(feed) - s.feed_power[feed];
      int r = 0;
      for (const auto& st : streams) {
        const auto row = power.feeder.at(l, st.gateway).row(f);
        const Eigen::Index bj = row.size();
        // [F p]_f = a p: real part [Re a, -Im a], imaginary part [Im a, Re a].
        qc.factor.block(r, st.offset, 1, bj) = row.real();
        qc.factor.block(r, st.offset + bj, 1, bj) = -row.imag();
        qc.factor.block(r + 1, st.offset, 1, bj) = row.imag();
        qc.factor.block(r + 1, st.offset + bj, 1, bj) = row.real();
        r += 2;
      }
      out.push_back(std::move(qc));
    }
  }
  return out;
}

Subproblem build_program(const SafTerms& saf, const PowerModel& power, const Scenario& s,
                         Strategy strategy) {
  const bool rs = strategy == Strategy::rs;
  if (static_cast<int>(saf.priv.size()) != s.users() || (rs && static_cast<int>(saf.common.size()) != s.users()))
    throw Error(ErrorCode::mode_mismatch, "SAF terms do not match the requested strategy");
  Subproblem sp;
  ConicProgram& prog = sp.program;
  sp.layout = make_layout(s, strategy, prog.layout);
  const ProgramLayout& lay = sp.layout;
  const int n = num_vars_of(prog.layout);
  prog.num_vars = n;
  prog.objective = VectorXd::Zero(n);
  prog.objective(lay.rg) = 1.0;

  for (int m = 0; m < s.groups(); ++m) {
    LinearConstraint lc;
    lc.tag = ConstraintTag::mmf_link;
    lc.index = m;
    lc.a = VectorXd::Zero(n);
    lc.a(lay.rg) = 1.0;
    lc.a(lay.r + m) = -1.0;
    if (rs) lc.a(lay.c + m) = -1.0;
    prog.linear.push_back(std::move(lc));
  }
  if (rs) {
    for (int m = 0; m < s.groups(); ++m) {
      LinearConstraint lc;
      lc.tag = ConstraintTag::nonneg_portion;
      lc.index = m;
      lc.a = VectorXd::Zero(n);
      lc.a(lay.c + m) = -1.0;
      prog.linear.push_back(std::move(lc));
    }
  }

  const auto streams = streams_of(lay, s);
  for (int k = 0; k < s.users(); ++k) {
    const int m = s.user_to_group[k];
    const int own = s.group_to_gateway[m];
    const SafUser& su = saf.priv[k];
    const auto factors = psi_factors(su);
    auto include = [own](const Stream& st) { return !(st.is_common && st.owner == own); };
    QuadraticConstraint qc = wmse_constraint(su, factors, streams, include, lay.priv[m], n);
    qc.tag = ConstraintTag::private_wmse;
    qc.index = k;
    qc.b(lay.r + m) = 1.0;
    prog.quadratic.push_back(std::move(qc));
  }
  if (rs) {
    for (int k = 0; k < s.users(); ++k) {
      const int own = s.gateway_of_user(k);
      const SafUser& su = saf.common[k];
      const auto factors = psi_factors(su);
      auto include = [](const Stream&) { return true; };
      QuadraticConstraint qc = wmse_constraint(su, factors, streams, include, lay.common[own], n);
      qc.tag = ConstraintTag::common_wmse;
      qc.index = k;
      for (int i : s.groups_of_gateway(own)) qc.b(lay.c + i) = 1.0;
      prog.quadratic.push_back(std::move(qc));
    }
  }
  for (auto& qc : power_constraints(power, s, lay, n)) prog.quadratic.push_back(std::move(qc));
  return sp;
}

SubproblemResult extract(const Subproblem& sp, const VectorXd& x, const PrecoderSet& stage_template,
                         const Scenario& s) {
  const ProgramLayout& lay = sp.layout;
  SubproblemResult res;
  res.precoders.strategy = lay.strategy;
  res.precoders.stage = stage_template.stage;
  res.precoders.first_stage = stage_template.first_stage;
  res.precoders.obp_filter = stage_template.obp_filter;
  for (std::size_t l = 0; l < lay.common.size(); ++l)
    res.precoders.common.push_back(unlift_vector(x.segment(lay.common[l], 2 * s.cluster_size(static_cast<int>(l)))));
  for (int m = 0; m < s.groups(); ++m)
    res.precoders.priv.push_back(
        unlift_vector(x.segment(lay.priv[m], 2 * s.cluster_size(s.group_to_gateway[m]))));
  res.objective = x(lay.rg);
  res.group_rate = x.segment(lay.r, s.groups());
  res.portions = lay.c >= 0 ? VectorXd(x.segment(lay.c, s.groups())) : VectorXd::Zero(s.groups());
  return res;
}

SubproblemResult solve_subproblem(const Subproblem& sp, const PrecoderSet& stage_template,
                                  const Scenario& s, const SolverOptions& opt) {
  ConicSolution sol = solve(sp.program, opt);
  if (sol.status == SolveStatus::infeasible)
    throw Error(ErrorCode::infeasible, "precoder update reported infeasible");
  if (sol.status != SolveStatus::optimal)
    throw Error(ErrorCode::max_iter,
                fmt::format("precoder update not certified after {} iterations (pres {:.3e}, dres {:.3e}, "
                            "gap {:.3e}, relgap {:.3e})",
                            sol.iterations, sol.primal_residual, sol.dual_residual, sol.gap,
                            sol.relative_gap));
  SubproblemResult res = extract(sp, sol.x, stage_template, s);
  res.solution = std::move(sol);
  return res;
}

VectorXd pack_precoders(const ProgramLayout& layout, const PrecoderSet& p, int num_vars) {
  VectorXd x = VectorXd::Zero(num_vars);
  for (std::size_t l = 0; l < layout.common.size(); ++l)
    x.segment(layout.common[l], 2 * p.common[l].size()) = lift_vector(p.common[l]);
  for (std::size_t m = 0; m < layout.priv.size(); ++m)
    x.segment(layout.priv[m], 2 * p.priv[m].size()) = lift_vector(p.priv[m]);
  return x;
}

}  // namespace satrs
