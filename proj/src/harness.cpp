// SPDX-License-Identifier: Apache-2.0
#include "satrs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "satrs/error.hpp"

namespace satrs {

std::string Scheme::name() const {
  std::string n(to_string(strategy));
  if (obp) n += "+OBP";
  return n;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "RS") return {Strategy::rs, false};
  if (name == "NoRS") return {Strategy::nors, false};
  if (name == "RS+OBP") return {Strategy::rs, true};
  if (name == "NoRS+OBP") return {Strategy::nors, true};
  throw Error(ErrorCode::invalid_config, "unknown scheme '" + name + "'");
}

std::vector<Scheme> all_schemes() {
  return {{Strategy::rs, false}, {Strategy::nors, false}, {Strategy::rs, true}, {Strategy::nors, true}};
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void fill_from_trace(TrialOutcome& o, const AoTrace& tr) {
  o.ok = true;
  o.mmf = tr.realized.mmf;
  o.saa_objective = tr.saa_objective;
  o.ao_objective = tr.saa_objective;
  o.iterations = tr.iterations;
  o.converged = tr.converged;
  o.ao_trace = tr.objective;
  o.precoders = tr.precoders;
  double prev = 0.0;
  o.max_power_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.objective.size(); ++i) {
    if (tr.objective[i] < prev - 1e-9) o.monotone = false;
    prev = tr.objective[i];
    o.max_power_excess = std::max(o.max_power_excess, tr.power_excess[i]);
    if (tr.power_excess[i] > 1e-6) ++o.violations;
  }
}

// RS point with zero common power carrying the NoRS private precoders.
PrecoderSet embed_nors(const PrecoderSet& nors, const Scenario& s) {
  PrecoderSet p = nors;
  p.strategy = Strategy::rs;
  p.common.clear();
  for (int l = 0; l < s.gateways(); ++l) p.common.push_back(VectorXcd::Zero(s.cluster_size(l)));
  return p;
}

}  // namespace

std::vector<TrialOutcome> run_trial(const Scenario& s, std::uint64_t trial,
                                    const std::vector<Scheme>& schemes, const AoOptions& ao) {
  std::vector<TrialOutcome> out(schemes.size());
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    out[i].scheme = schemes[i];
    out[i].trial = trial;
  }
  auto fail_all = [&](const std::string& what, auto pred) {
    for (auto& o : out)
      if (pred(o)) {
        o.ok = false;
        o.error = what;
      }
  };

  ChannelDraw draw;
  try {
    draw = make_channel_draw(s, trial);
  } catch (const std::exception& e) {
    fail_all(std::string("channel draw: ") + e.what(), [](const TrialOutcome&) { return true; });
    return out;
  }

  for (bool obp : {false, true}) {
    const bool wanted = std::any_of(schemes.begin(), schemes.end(), [&](const Scheme& sc) { return sc.obp == obp; });
    if (!wanted) continue;
    auto same_stage = [obp](const TrialOutcome& o) { return o.scheme.obp == obp; };

    const auto t_stage = Clock::now();
    PrecoderSet stage;
    int fs_iters = 0;
    double fs_mse = 0.0;
    if (obp) {
      try {
        const FirstStageResult fs = run_first_stage(draw.feeder_estimate, s, draw.sigma_e2,
                                                    random_first_stage(s, s.seed, trial));
        stage = fs.stage_template(Strategy::rs);
        fs_iters = fs.iterations;
        fs_mse = fs.mse_trace.back();
      } catch (const std::exception& e) {
        fail_all(std::string("first stage: ") + e.what(), same_stage);
        continue;
      }
    }
    const double stage_ms = elapsed_ms(t_stage);
    AoInput in;
    try {
      in = make_ao_input(draw, s, stage);
    } catch (const std::exception& e) {
      fail_all(std::string("AO input: ") + e.what(), same_stage);
      continue;
    }

    // NoRS runs for either strategy: RS compares against its embedding.
    std::optional<AoTrace> nors_trace;
    double nors_ms = 0.0;
    std::string nors_error;
    {
      const auto t0 = Clock::now();
      try {
        nors_trace = run_ao(in, s, Strategy::nors, ao);
      } catch (const std::exception& e) {
        nors_error = e.what();
      }
      nors_ms = elapsed_ms(t0);
    }

    for (auto& o : out) {
      if (o.scheme.obp != obp) continue;
      o.first_stage_iterations = fs_iters;
      o.first_stage_mse = fs_mse;
      if (o.scheme.strategy == Strategy::nors) {
        if (!nors_trace) {
          o.error = nors_error;
          continue;
        }
        fill_from_trace(o, *nors_trace);
        o.wall_ms = stage_ms + nors_ms;
        continue;
      }
      const auto t0 = Clock::now();
      try {
        const AoTrace rs = run_ao(in, s, Strategy::rs, ao);
        fill_from_trace(o, rs);
        if (nors_trace && nors_trace->saa_objective > rs.saa_objective) {
          // Zero common power leaves every private SINR unchanged, so the
          // embedded point attains the NoRS objective exactly.
          const PrecoderSet emb = embed_nors(nors_trace->precoders, s);
          o.saa_objective = nors_trace->saa_objective;
          o.mmf = sinr_and_rates(in.truth, in.truth_noise, emb, s).mmf;
          o.precoders = emb;
          o.nors_embedded = true;
        }
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
      }
      o.wall_ms = stage_ms + elapsed_ms(t0);
    }
  }
  for (const auto& o : out)
    if (!o.ok) spdlog::warn("trial {} scheme {} failed: {}", trial, o.scheme.name(), o.error);
  return out;
}

std::string to_string(SweepVar v) {
  switch (v) {
    case SweepVar::none: return "none";
    case SweepVar::per_feed_power: return "per_feed_power";
    case SweepVar::delta: return "delta";
    case SweepVar::alpha: return "alpha";
    case SweepVar::users_per_group: return "users_per_group";
    case SweepVar::group_sizes: return "group_sizes";
  }
  return "none";
}

SweepVar parse_sweep_var(const std::string& name) {
  for (SweepVar v : {SweepVar::none, SweepVar::per_feed_power, SweepVar::delta, SweepVar::alpha,
                     SweepVar::users_per_group, SweepVar::group_sizes})
    if (to_string(v) == name) return v;
  throw Error(ErrorCode::invalid_config, "unknown sweep variable '" + name + "'");
}

int ExperimentSpec::points() const {
  switch (var) {
    case SweepVar::none: return 1;
    case SweepVar::group_sizes: return static_cast<int>(group_sets.size());
    default: return static_cast<int>(values.size());
  }
}

std::string ExperimentSpec::value_label(int point) const {
  if (var == SweepVar::none) return "";
  if (var == SweepVar::group_sizes) {
    std::string out;
    for (int g : group_sets.at(point)) out += (out.empty() ? "" : "-") + std::to_string(g);
    return out;
  }
  return fmt::format("{}", values.at(point));
}

Scenario ExperimentSpec::scenario_at(int point) const {
  nlohmann::json j = scenario;
  switch (var) {
    case SweepVar::none: break;
    case SweepVar::per_feed_power:
      j.erase("feed_power_w");
      j.erase("total_power_w");
      j["per_feed_power_w"] = values.at(point);
      break;
    case SweepVar::delta: j["delta"] = values.at(point); break;
    case SweepVar::alpha: j["alpha"] = values.at(point); break;
    case SweepVar::users_per_group:
      j.erase("group_sizes");
      j.erase("user_to_group");
      j.erase("user_positions");
      j["users_per_group"] = static_cast<int>(std::lround(values.at(point)));
      break;
    case SweepVar::group_sizes:
      j.erase("user_to_group");
      j.erase("user_positions");
      j["group_sizes"] = group_sets.at(point);
      break;
  }
  j["samples"] = samples;
  j["seed"] = seed;
  if (perfect_csit) j["perfect_csit"] = *perfect_csit;
  return build_scenario(j);
}

void validate(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw Error(ErrorCode::invalid_config, "trials must be >= 1");
  if (spec.samples < 1) throw Error(ErrorCode::invalid_config, "samples must be >= 1");
  if (spec.schemes.empty()) throw Error(ErrorCode::invalid_config, "no schemes requested");
  if (spec.var == SweepVar::group_sizes) {
    if (spec.group_sets.empty()) throw Error(ErrorCode::invalid_config, "group_sizes sweep without values");
  } else if (spec.var != SweepVar::none) {
    if (spec.values.empty()) throw Error(ErrorCode::invalid_config, "sweep without values");
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      if (!std::isfinite(spec.values[i])) throw Error(ErrorCode::invalid_config, "sweep values must be finite");
      if (i && spec.values[i] < spec.values[i - 1])
        throw Error(ErrorCode::invalid_config, "sweep values must be sorted");
    }
  }
}

ExperimentSpec parse_experiment(const nlohmann::json& j) {
  ExperimentSpec spec;
  if (j.contains("scenario")) spec.scenario = j.at("scenario");
  if (j.contains("schemes")) {
    spec.schemes.clear();
    for (const auto& n : j.at("schemes")) spec.schemes.push_back(parse_scheme(n.get<std::string>()));
  }
  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    spec.var = parse_sweep_var(sw.at("var").get<std::string>());
    if (spec.var == SweepVar::group_sizes)
      spec.group_sets = sw.at("values").get<std::vector<std::vector<int>>>();
    else if (spec.var != SweepVar::none)
      spec.values = sw.at("values").get<std::vector<double>>();
  }
  spec.trials = j.value("trials", spec.trials);
  spec.samples = j.value("samples", spec.samples);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("perfect_csit")) spec.perfect_csit = j.at("perfect_csit").get<bool>();
  spec.out = j.value("out", spec.out);
  spec.threads = j.value("threads", spec.threads);
  spec.ao.tol = j.value("tolerance", spec.ao.tol);
  spec.ao.max_iter = j.value("max_iter", spec.ao.max_iter);
  validate(spec);
  return spec;
}

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

SweepResult run_sweep(const ExperimentSpec& spec, const ProgressFn& progress,
                      const std::atomic<bool>* cancel) {
  validate(spec);
  const int points = spec.points();
  std::vector<Scenario> scen;
  scen.reserve(points);
  for (int p = 0; p < points; ++p) scen.push_back(spec.scenario_at(p));

  SweepResult res;
  res.outcomes.assign(points, std::vector<std::vector<TrialOutcome>>(spec.trials));
  const int total = points * spec.trials;
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::vector<std::atomic<int>> finished(points);
  auto worker = [&] {
    for (int task = next++; task < total; task = next++) {
      if (cancel && cancel->load()) break;
      const int p = task / spec.trials;
      const int t = task % spec.trials;
      res.outcomes[p][t] = run_trial(scen[p], static_cast<std::uint64_t>(t), spec.schemes, spec.ao);
      ++finished[p];
      const int d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  int threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, total));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (int p = 0; p < points; ++p) {
    if (finished[p].load() != spec.trials) {
      res.complete = false;
      continue;
    }
    for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
      SweepRow row;
      row.sweep_var = to_string(spec.var);
      row.sweep_value = spec.value_label(p);
      row.scheme = spec.schemes[si];
      row.trials = spec.trials;
      row.samples = spec.samples;
      std::vector<double> mmf, saa;
      double iters = 0.0, wall = 0.0;
      for (int t = 0; t < spec.trials; ++t) {
        const TrialOutcome& o = res.outcomes[p][t][si];
        if (!o.ok) {
          ++row.failures;
          continue;
        }
        mmf.push_back(o.mmf);
        saa.push_back(o.saa_objective);
        iters += o.iterations;
        wall += o.wall_ms;
        row.violations += o.violations;
      }
      std::tie(row.mmf_mean, row.mmf_stderr) = mean_stderr(mmf);
      std::tie(row.saa_obj_mean, row.saa_obj_stderr) = mean_stderr(saa);
      if (!mmf.empty()) {
        row.iters_mean = iters / static_cast<double>(mmf.size());
        row.wall_ms_mean = wall / static_cast<double>(mmf.size());
      }
      res.rows.push_back(std::move(row));
    }
  }
  return res;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool include_timing) {
  os << "sweep_var,sweep_value,scheme,obp,trials,S,mmf_mean,mmf_stderr,saa_obj_mean,iters_mean,"
        "wall_ms_mean,violations\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{},{},{},{},{},{:.10g},{:.10g},{:.10g},{:.6g},{:.6g},{}\n", r.sweep_var,
                      r.sweep_value, to_string(r.scheme.strategy), r.scheme.obp ? 1 : 0, r.trials,
                      r.samples, r.mmf_mean, r.mmf_stderr, r.saa_obj_mean, r.iters_mean,
                      include_timing ? r.wall_ms_mean : 0.0, r.violations);
  }
}

ExperimentSpec preset(const std::string& name) {
  ExperimentSpec spec;
  if (name == "fig3") {
    spec.var = SweepVar::per_feed_power;
    spec.values = {20, 40, 60, 80, 100};
  } else if (name == "fig4") {
    spec.var = SweepVar::delta;
    spec.values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  } else if (name == "fig5") {
    spec.var = SweepVar::alpha;
    spec.values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  } else if (name == "fig6") {
    spec.var = SweepVar::users_per_group;
    spec.values = {1, 2, 3, 4};
  } else if (name == "grouping") {
    spec.var = SweepVar::per_feed_power;
    spec.values = {20, 40, 60, 80, 100};
    spec.scenario["group_sizes"] = {1, 1, 1, 2, 2, 2, 3, 3, 3};
  } else {
    throw Error(ErrorCode::invalid_config, "unknown preset '" + name + "' (fig3|fig4|fig5|fig6|grouping)");
  }
  return spec;
}

}  // namespace satrs
