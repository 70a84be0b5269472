// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: wires a parsed config to the chain or time-change
// sampler, streams every path through the requested statistics and writes
// report.csv plus manifest.json.
#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/config.hpp"
#include "sticky_dbm/error.hpp"
#include "sticky_dbm/parallel.hpp"
#include "sticky_dbm/report.hpp"
#include "sticky_dbm/samplers.hpp"
#include "sticky_dbm/statistics.hpp"

#ifndef STICKY_DBM_VERSION
#define STICKY_DBM_VERSION "0.0.0"
#endif

namespace sticky_dbm {

inline constexpr const char* kLibraryVersion = STICKY_DBM_VERSION;

/// Everything derived from a config that the per-path statistics need.
struct ChainSetup {
  Density density;
  StickyStructure sticky;
  JumpChain chain;
  std::uint32_t start = 0;
  std::vector<double> sticky_ind;
  std::vector<std::vector<double>> observables;  // per stats.observables
  std::vector<double> small_ball;
  std::vector<int> side_labels;
  std::vector<FukushimaTables> fukushima;
  std::vector<ProbeCell> probes;
};

inline ChainSetup make_chain_setup(const ExperimentConfig& cfg) {
  Density density = cfg.density();
  StickyStructure sticky = cfg.sticky();
  JumpChain chain = build_chain(density, sticky, cfg.grid());
  const auto start = chain.grid()->nearest(cfg.start);
  require(start.has_value(), Errc::configuration, "start point outside the truncation box");
  ChainSetup s{density, sticky, std::move(chain), *start, {}, {}, {}, {}, {}, {}};
  s.sticky_ind = sticky_indicator(s.chain);
  for (const auto& name : cfg.stats.observables)
    s.observables.push_back(restrict_to_states(s.chain, *observable(name, sticky)));
  const double r = cfg.stats.small_ball;
  const int d = cfg.dim;
  s.small_ball = restrict_to_states(s.chain, [r, d](const Point& x) { return norm(x, d) <= r + 1e-12 ? 1.0 : 0.0; });
  s.side_labels = chain_side_labels(s.chain, sticky);
  if (cfg.stats.wants("fukushima"))
    for (const auto& id : cfg.stats.test_functions)
      s.fukushima.push_back(
          fukushima_tables(s.chain, *catalog::find(id, sticky), density, sticky, cfg.stats.generator_sampling));
  for (const auto& p : cfg.stats.probes) s.probes.push_back({p, cfg.h / 2});
  return s;
}

/// All per-path accumulators of a chain experiment behind one visitor.
struct ChainPathStats {
  using Avg = TimeAverage<std::uint32_t, StateTable>;
  Avg sejour;
  std::vector<Avg> observables;
  Avg small_ball;
  std::optional<Occupancy> occupancy;
  ChainCrossings crossings;
  std::optional<ByCoordinate<IncrementMoments>> moments;
  std::vector<FukushimaPath> fukushima;

  ChainPathStats(const ExperimentConfig& cfg, const ChainSetup& s)
      : sejour(StateTable{s.sticky_ind}, cfg.burn_in, cfg.sim.T),
        small_ball(StateTable{s.small_ball}, cfg.burn_in, cfg.sim.T),
        crossings(s.side_labels, crossing_components(s.sticky)) {
    for (const auto& o : s.observables) observables.emplace_back(StateTable{o}, cfg.burn_in, cfg.sim.T);
    if (cfg.stats.wants("occupancy")) occupancy.emplace(s.chain.size(), cfg.burn_in);
    if (cfg.stats.wants("moments"))
      moments.emplace(ByCoordinate<IncrementMoments>{
          &s.chain, IncrementMoments(cfg.dim, cfg.stats.moment_step, cfg.stats.lag, cfg.burn_in, cfg.sim.T, s.probes)});
    for (const auto& t : s.fukushima) fukushima.emplace_back(t.f, t.Lf, t.gamma, cfg.sim.T, cfg.stats.blocks);
  }

  void hold(std::uint32_t st, double t0, double t1) {
    sejour.hold(st, t0, t1);
    for (auto& o : observables) o.hold(st, t0, t1);
    small_ball.hold(st, t0, t1);
    if (occupancy) occupancy->hold(st, t0, t1);
    crossings.hold(st, t0, t1);
    if (moments) moments->hold(st, t0, t1);
    for (auto& f : fukushima) f.hold(st, t0, t1);
  }

  void finish() {
    for (auto& f : fukushima) f.finish();
  }
};

/// Per-path accumulators of a time-change experiment.
struct PositionPathStats {
  struct SmallBall {
    double r;
    double operator()(double x) const { return std::abs(x) <= r ? 1.0 : 0.0; }
  };
  TimeAverage<double, SmallBall> small_ball;
  PositionCrossings crossings;

  PositionPathStats(const ExperimentConfig& cfg, const StickyStructure& sticky)
      : small_ball(SmallBall{cfg.stats.small_ball}, cfg.burn_in, cfg.sim.T), crossings(sticky) {}

  void hold(double x, double t0, double t1) {
    small_ball.hold(x, t0, t1);
    crossings.hold(x, t0, t1);
  }
  void finish() {}
};

namespace detail {

inline ReportRow base_row(const ExperimentConfig& cfg, std::uint64_t n_paths) {
  ReportRow r;
  r.experiment_id = cfg.id;
  r.n_paths = n_paths;
  r.T = cfg.sim.T;
  r.h = cfg.kind == ExperimentKind::chain ? cfg.h : std::numeric_limits<double>::quiet_NaN();
  r.seed = cfg.sim.seed;
  return r;
}

inline std::string point_label(const Point& p, int dim) {
  return dim == 1 ? format_number(p[0]) : format_number(p[0]) + ":" + format_number(p[1]);
}

/// Passes if the estimate is within a relative tolerance of the target, or
/// within its own interval when the target is 0.
inline bool within_rel(double est, double target, double rel, double ci) {
  return std::abs(est - target) <= std::max(rel * std::abs(target), target == 0.0 ? ci : 0.0);
}

}  // namespace detail

/// Report rows for a finished set of chain paths.
inline std::vector<ReportRow> chain_rows(const ExperimentConfig& cfg, const ChainSetup& s,
                                         const std::vector<ChainPathStats>& paths) {
  std::vector<ReportRow> rows;
  const auto n = static_cast<std::uint64_t>(paths.size());
  const auto box = cfg.grid().box;
  auto row = [&](std::string stat) {
    ReportRow r = detail::base_row(cfg, n);
    r.statistic = std::move(stat);
    return r;
  };
  auto two_level = [&](const std::string& name, const Estimate& sim, double chain_value, double continuum) {
    ReportRow a = row(name);
    a.value = sim.mean;
    a.ci_halfwidth = sim.ci_halfwidth;
    a.theoretical = chain_value;
    a.pass = std::abs(sim.mean - chain_value) <= sim.ci_halfwidth;
    rows.push_back(a);
    ReportRow b = row(name + "_chain_vs_continuum");
    b.value = chain_value;
    b.theoretical = continuum;
    b.pass = std::abs(chain_value - continuum) <= cfg.stats.bias_tol;
    rows.push_back(b);
  };

  if (cfg.stats.wants("sejour")) {
    RunningStats st;
    for (const auto& p : paths) st.add(p.sejour.value());
    two_level("sejour", estimate(st), s.chain.sticky_ratio(), continuum_sejour_ratio(s.density, s.sticky, box));
  }
  if (cfg.stats.wants("ergodic")) {
    for (std::size_t k = 0; k < cfg.stats.observables.size(); ++k) {
      RunningStats st;
      for (const auto& p : paths) st.add(p.observables[k].value());
      const auto f = *observable(cfg.stats.observables[k], s.sticky);
      two_level("ergodic:" + cfg.stats.observables[k], estimate(st), s.chain.stationary_average(s.observables[k]),
                continuum_average(s.density, s.sticky, f, box));
    }
  }
  if (cfg.stats.wants("small_ball")) {
    RunningStats st;
    for (const auto& p : paths) st.add(p.small_ball.value());
    const Estimate e = estimate(st);
    ReportRow r = row("small_ball");
    r.value = e.mean;
    r.ci_halfwidth = e.ci_halfwidth;
    r.pass = e.mean >= 0.0 && e.mean <= 1.0;
    rows.push_back(r);
  }
  if (cfg.stats.wants("occupancy")) {
    Occupancy pooled(s.chain.size(), cfg.burn_in);
    for (const auto& p : paths) pooled.merge(*p.occupancy);
    ReportRow r = row("occupancy_tv");
    r.value = occupancy_tv(s.chain, pooled);
    r.theoretical = 0.0;
    r.pass = r.value < cfg.stats.tv_tol;
    rows.push_back(r);
  }
  if (cfg.stats.wants("crossings")) {
    std::vector<std::uint64_t> counts;
    for (const auto& p : paths) counts.push_back(p.crossings.counter.total());
    const auto sum = summarize_crossings(counts);
    ReportRow a = row("crossings_min");
    a.value = static_cast<double>(sum.min);
    a.pass = sum.min >= cfg.stats.min_crossings;
    rows.push_back(a);
    ReportRow b = row("crossings_mean");
    b.value = sum.mean;
    rows.push_back(b);
  }
  if (cfg.stats.wants("moments")) {
    std::vector<IncrementMoments> per;
    for (const auto& p : paths) per.push_back(p.moments->inner);
    const auto rep = moment_report(per, cfg.stats.lag, cfg.stats.min_samples);
    for (const auto& c : rep) {
      const Point drift_target = s.density.log_gradient(c.cell.center);
      for (int a = 0; a < cfg.dim; ++a) {
        const std::string axis = cfg.dim > 1 ? "x" + std::to_string(a + 1) : "";
        const std::string at = "@" + detail::point_label(c.cell.center, cfg.dim);
        ReportRow d = row("drift" + axis + at);
        d.value = c.drift[a];
        d.ci_halfwidth = c.drift_ci[a];
        d.theoretical = drift_target[a];
        d.pass = !c.insufficient && detail::within_rel(c.drift[a], drift_target[a], cfg.stats.drift_rel_tol, c.drift_ci[a]);
        rows.push_back(d);
        ReportRow q = row("diffusion" + axis + at);
        q.value = c.diffusion[a];
        q.theoretical = 2.0;
        q.pass = !c.insufficient && detail::within_rel(c.diffusion[a], 2.0, cfg.stats.diffusion_rel_tol, 0.0);
        rows.push_back(q);
      }
      ReportRow cnt = row("moment_samples" + std::string("@") + detail::point_label(c.cell.center, cfg.dim));
      cnt.value = static_cast<double>(c.samples);
      cnt.theoretical = static_cast<double>(cfg.stats.min_samples);
      cnt.pass = !c.insufficient;
      rows.push_back(cnt);
    }
  }
  if (cfg.stats.wants("fukushima")) {
    for (std::size_t k = 0; k < cfg.stats.test_functions.size(); ++k) {
      std::vector<FukushimaPath> per;
      for (const auto& p : paths) per.push_back(p.fukushima[k]);
      const auto rep = fukushima_report(cfg.stats.test_functions[k], per);
      ReportRow m = row("fukushima_mean:" + rep.function);
      m.value = rep.mean_M.mean;
      m.ci_halfwidth = rep.mean_M.ci_halfwidth;
      m.theoretical = 0.0;
      m.pass = std::abs(rep.mean_M.mean) <= 3.0 * rep.mean_M.ci_halfwidth;
      rows.push_back(m);
      ReportRow q = row("fukushima_ratio:" + rep.function);
      q.value = rep.ratio;
      q.theoretical = 1.0;
      q.pass = std::abs(rep.ratio - 1.0) <= cfg.stats.ratio_tol;
      rows.push_back(q);
    }
  }
  return rows;
}

inline std::vector<ReportRow> position_rows(const ExperimentConfig& cfg, const std::vector<PositionPathStats>& paths) {
  std::vector<ReportRow> rows;
  const auto n = static_cast<std::uint64_t>(paths.size());
  if (cfg.stats.wants("small_ball")) {
    RunningStats st;
    for (const auto& p : paths) st.add(p.small_ball.value());
    const Estimate e = estimate(st);
    ReportRow r = detail::base_row(cfg, n);
    r.statistic = "small_ball";
    r.value = e.mean;
    r.ci_halfwidth = e.ci_halfwidth;
    r.pass = e.mean >= 0.0 && e.mean <= 1.0;
    rows.push_back(r);
  }
  if (cfg.stats.wants("crossings")) {
    std::vector<std::uint64_t> counts;
    for (const auto& p : paths) counts.push_back(p.crossings.counter.total());
    const auto sum = summarize_crossings(counts);
    ReportRow a = detail::base_row(cfg, n);
    a.statistic = "crossings_min";
    a.value = static_cast<double>(sum.min);
    a.pass = sum.min >= cfg.stats.min_crossings;
    rows.push_back(a);
    ReportRow b = detail::base_row(cfg, n);
    b.statistic = "crossings_mean";
    b.value = sum.mean;
    rows.push_back(b);
  }
  return rows;
}

/// Simulates and evaluates without touching the filesystem. Under snapshot
/// recording the statistics see the snapshot path, as `report` would.
inline std::vector<ReportRow> evaluate_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  const bool snapshots = cfg.sim.recording == Recording::snapshots;
  if (cfg.kind == ExperimentKind::chain) {
    const ChainSetup s = make_chain_setup(cfg);
    SimConfig sim = cfg.sim;
    sim.start_state = s.start;
    sim.validate(s.chain.size());
    auto per = map_indexed(sim.n_paths, threads, [&](std::size_t i) {
      ChainPathStats v(cfg, s);
      if (snapshots)
        replay(simulate_chain_sample(s.chain, sim, i), v);
      else
        simulate_chain_path(s.chain, sim.start_state, sim.T, path_seed(sim.seed, i), v);
      v.finish();
      return v;
    });
    return chain_rows(cfg, s, per);
  }
  const StickyStructure sticky = cfg.sticky();
  TimeChangeParams tc = cfg.timechange;
  tc.x0 = cfg.start[0];
  tc.validate();
  auto per = map_indexed(cfg.sim.n_paths, threads, [&](std::size_t i) {
    PositionPathStats v(cfg, sticky);
    if (snapshots)
      replay(simulate_timechange_sample(tc, cfg.sim, i), v);
    else
      simulate_timechange_path(tc, cfg.sim.T, path_seed(cfg.sim.seed, i), v);
    return v;
  });
  return position_rows(cfg, per);
}

/// Statistics from stored paths (paths.csv written by `simulate`).
inline std::vector<ReportRow> evaluate_recorded(const ExperimentConfig& cfg, const std::vector<PathRecord>& records) {
  if (cfg.kind == ExperimentKind::chain) {
    const ChainSetup s = make_chain_setup(cfg);
    const auto paths = chain_paths_from_records(records, s.chain, cfg.sim.T, cfg.sim.seed);
    std::vector<ChainPathStats> per;
    for (const auto& p : paths) {
      ChainPathStats v(cfg, s);
      replay(p, v);
      v.finish();
      per.push_back(std::move(v));
    }
    require(!per.empty(), Errc::configuration, "no paths in the input");
    return chain_rows(cfg, s, per);
  }
  const StickyStructure sticky = cfg.sticky();
  const auto paths = position_paths_from_records(records, cfg.sim.T, cfg.sim.seed);
  std::vector<PositionPathStats> per;
  for (const auto& p : paths) {
    PositionPathStats v(cfg, sticky);
    replay(p, v);
    per.push_back(std::move(v));
  }
  require(!per.empty(), Errc::configuration, "no paths in the input");
  return position_rows(cfg, per);
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline nlohmann::json manifest_json(const ExperimentConfig& cfg, const std::string& command, double wall_seconds,
                                    const std::vector<std::string>& files) {
  nlohmann::json j;
  j["experiment_id"] = cfg.id;
  j["command"] = command;
  j["library_version"] = kLibraryVersion;
  j["config_hash"] = hex64(config_hash(cfg.source));
  j["seed"] = cfg.sim.seed;
  j["wall_clock_seconds"] = wall_seconds;
  j["files"] = files;
  j["config"] = cfg.entries;
  j["config_text"] = cfg.source;
  return j;
}

struct RunOutcome {
  std::vector<ReportRow> rows;
  bool pass = true;
  std::filesystem::path report_path;
  std::filesystem::path manifest_path;
};

inline void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg, const std::string& command,
                           double wall, const std::vector<std::string>& files) {
  std::ofstream m(dir / "manifest.json");
  m << manifest_json(cfg, command, wall, files).dump(2) << '\n';
  require(static_cast<bool>(m), Errc::configuration, "cannot write manifest in " + dir.string());
}

inline RunOutcome write_rows(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                             std::vector<ReportRow> rows, const std::string& command, double wall) {
  std::filesystem::create_directories(dir);
  RunOutcome out;
  out.rows = std::move(rows);
  out.pass = all_pass(out.rows);
  out.report_path = dir / "report.csv";
  out.manifest_path = dir / "manifest.json";
  std::ofstream r(out.report_path);
  write_report(r, out.rows);
  require(static_cast<bool>(r), Errc::configuration, "cannot write " + out.report_path.string());
  write_manifest(dir, cfg, command, wall, {"report.csv"});
  return out;
}

/// Runs an experiment and writes report.csv and manifest.json to `dir`.
/// Module errors are rethrown with the experiment id prepended.
inline RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ReportRow> rows;
  try {
    rows = evaluate_experiment(cfg, threads);
  } catch (const Error& e) {
    throw Error(e.code(), "experiment " + cfg.id + ": " + e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return write_rows(dir, cfg, std::move(rows), "run", wall);
}

/// Simulates and writes paths.csv and manifest.json to `dir`.
inline std::filesystem::path simulate_to_files(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                               unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(dir);
  const auto path = dir / "paths.csv";
  std::ofstream os(path);
  const StickyStructure sticky = cfg.sticky();
  try {
    if (cfg.kind == ExperimentKind::chain) {
      const JumpChain chain = build_chain(cfg.density(), sticky, cfg.grid());
      SimConfig sim = cfg.sim;
      const auto start = chain.grid()->nearest(cfg.start);
      require(start.has_value(), Errc::configuration, "start point outside the truncation box");
      sim.start_state = *start;
      os << "path_id,t,x1" << (cfg.dim > 1 ? ",x2" : "") << ",on_sticky\n";
      batch_simulate(
          chain, sim, 0, sim.n_paths,
          [&](const PathSample& p) {
            std::ostringstream buf;
            write_paths(buf, {p}, &chain, cfg.dim, sticky);
            const std::string s = buf.str();
            os << s.substr(s.find('\n') + 1);
          },
          threads);
    } else {
      TimeChangeParams tc = cfg.timechange;
      tc.x0 = cfg.start[0];
      const auto paths = simulate_timechange_sticky_bm(tc, cfg.sim, threads);
      write_paths(os, paths, nullptr, 1, sticky);
    }
  } catch (const Error& e) {
    throw Error(e.code(), "experiment " + cfg.id + ": " + e.what());
  }
  require(static_cast<bool>(os), Errc::configuration, "cannot write " + path.string());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, cfg, "simulate", wall, {"paths.csv"});
  return path;
}

}  // namespace sticky_dbm
