// SPDX-License-Identifier: Apache-2.0
//
// The acceptance matrix. Each criterion is a function returning its checks;
// the parameters and tolerances below are fixed and the seeds are constants,
// so every run of a criterion is reproducible.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/dirichlet_form.hpp"
#include "sticky_dbm/geometry.hpp"
#include "sticky_dbm/measure.hpp"
#include "sticky_dbm/parallel.hpp"
#include "sticky_dbm/report.hpp"
#include "sticky_dbm/samplers.hpp"
#include "sticky_dbm/statistics.hpp"
#include "sticky_dbm/test_function.hpp"

namespace sticky_dbm::acceptance {

struct Check {
  std::string name;
  double value = 0.0;
  double target = std::numeric_limits<double>::quiet_NaN();
  std::string rule;
  bool pass = true;
  bool informational = false;  // reported but never gates the criterion
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool slow = false;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.informational && !c.pass) return false;
    return true;
  }
};

struct Options {
  unsigned threads = 1;
};

namespace detail {

inline Check gate(std::string name, double value, double target, std::string rule, bool pass) {
  return Check{std::move(name), value, target, std::move(rule), pass, false};
}

inline Check info(std::string name, double value, double target = std::numeric_limits<double>::quiet_NaN(),
                  std::string rule = "") {
  return Check{std::move(name), value, target, std::move(rule), true, true};
}

inline std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

inline StickyStructure atom_at_origin(double w) { return StickyStructure::points({{0.0, w}}); }

/// Records the state held at the end of the path.
template <class S>
struct FinalValue {
  S value{};
  void hold(S s, double, double) { value = s; }
};

/// Checks that holding intervals tile [0, T] without gaps.
struct Conservation {
  double expected_next = 0.0;
  double total = 0.0;
  bool contiguous = true;
  double end = 0.0;
  void hold(std::uint32_t, double t0, double t1) {
    if (t0 != expected_next || !(t1 > t0)) contiguous = false;
    total += t1 - t0;
    expected_next = t1;
    end = t1;
  }
};

/// Crossing counts at an intermediate checkpoint and at the end.
struct CheckpointCrossings {
  ChainCrossings inner;
  double checkpoint;
  std::uint64_t at_checkpoint = 0;
  bool recorded = false;

  CheckpointCrossings(const std::vector<int>& labels, std::size_t comps, double tc)
      : inner(labels, comps), checkpoint(tc) {}

  void hold(std::uint32_t s, double t0, double t1) {
    if (!recorded && t0 >= checkpoint) {
      at_checkpoint = inner.counter.total();
      recorded = true;
    }
    inner.hold(s, t0, t1);
  }

  std::uint64_t first() const { return recorded ? at_checkpoint : inner.counter.total(); }
};

}  // namespace detail

// ---------------------------------------------------------------------------

inline CriterionResult generator_symmetry(const Options& = {}) {
  CriterionResult r{1, "generator symmetry", false, {}, 0.0};
  double worst_1d = 0.0, worst_2d = 0.0;
  int pairs = 0;
  for (int dim : {1, 2}) {
    const StickyStructure sticky =
        dim == 1 ? detail::atom_at_origin(1.0) : StickyStructure::rectangle({-1.0, 1.0, -1.0, 1.0}, 1.0);
    for (const Density& rho : {Density::constant(dim), Density::gaussian(dim)}) {
      for (const auto& [fi, gi] : catalog::symmetry_pairs(dim)) {
        const TestFunction f = *catalog::find(fi, sticky), g = *catalog::find(gi, sticky);
        const SymmetryTerms t = symmetry_terms(f, g, rho, sticky);
        ++pairs;
        if (dim == 1) {
          const double scale = 1.0 + std::abs(energy_form(f, f, rho, sticky));
          worst_1d = std::max(worst_1d, t.residual() / scale);
        } else {
          worst_2d = std::max(worst_2d, t.residual());
        }
      }
    }
  }
  r.checks.push_back(detail::info("pairs", pairs));
  r.checks.push_back(detail::gate("max relative residual 1D", worst_1d, 1e-8, "<= 1e-8", worst_1d <= 1e-8));
  r.checks.push_back(detail::gate("max absolute residual 2D", worst_2d, 1e-6, "<= 1e-6", worst_2d <= 1e-6));
  return r;
}

inline CriterionResult chain_exactness(const Options& opt = {}) {
  CriterionResult r{2, "chain exactness (occupancy vs pi)", false, {}, 0.0};
  const Density rho = Density::gaussian(1);
  const StickyStructure sticky = detail::atom_at_origin(1.0);
  const JumpChain chain = build_chain(rho, sticky, {0.1, TruncationBox::cube(1, 6.0)});
  SimConfig sim;
  sim.seed = 20002;
  sim.T = 1e5;
  sim.n_paths = 32;
  sim.start_state = *chain.grid()->nearest(point1(0.0));
  const double burn = sim.T / 10.0;
  const auto per = run_chain_visitors(
      chain, sim, [&](std::size_t) { return Occupancy(chain.size(), burn); }, opt.threads);
  Occupancy pooled(chain.size(), burn);
  for (const auto& o : per) pooled.merge(o);
  const double tv = occupancy_tv(chain, pooled);
  r.checks.push_back(detail::gate("pooled total variation", tv, 0.02, "< 0.02", tv < 0.02));
  return r;
}

inline CriterionResult sejour_1d(const Options& opt = {}) {
  CriterionResult r{3, "sojourn fraction 1D", false, {}, 0.0};
  const Density rho = Density::gaussian(1);
  const StickyStructure sticky = detail::atom_at_origin(1.0);
  const TruncationBox box = TruncationBox::cube(1, 6.0);
  const JumpChain chain = build_chain(rho, sticky, {0.02, box});
  SimConfig sim;
  sim.seed = 30003;
  sim.T = 2e4;
  sim.n_paths = 32;
  sim.start_state = *chain.grid()->nearest(point1(0.0));
  const auto ind = sticky_indicator(chain);
  const double burn = sim.T / 10.0;
  const auto per = run_chain_visitors(
      chain, sim,
      [&](std::size_t) { return TimeAverage<std::uint32_t, StateTable>(StateTable{ind}, burn, sim.T); }, opt.threads);
  RunningStats st;
  for (const auto& a : per) st.add(a.value());
  const Estimate e = estimate(st);
  const double pi_ratio = chain.sticky_ratio();
  const double closed = 1.0 / (1.0 + std::sqrt(M_PI));
  r.checks.push_back(detail::gate("simulated fraction vs chain pi-ratio", e.mean, pi_ratio,
                                  "|diff| <= CI = " + detail::fmt(e.ci_halfwidth, 3), e.covers(pi_ratio)));
  r.checks.push_back(detail::gate("chain pi-ratio vs 1/(1+sqrt(pi))", pi_ratio, closed, "|diff| <= 0.01",
                                  std::abs(pi_ratio - closed) <= 0.01));
  r.checks.push_back(detail::info("continuum ratio by quadrature", continuum_sejour_ratio(rho, sticky, box), closed));
  return r;
}

inline CriterionResult sejour_2d(const Options& opt = {}) {
  CriterionResult r{4, "sojourn fraction 2D", true, {}, 0.0};
  const Density rho = Density::gaussian(2);
  const StickyStructure sticky = StickyStructure::rectangle({-1.0, 1.0, -1.0, 1.0}, 1.0);
  const TruncationBox box = TruncationBox::cube(2, 4.0);
  const JumpChain chain = build_chain(rho, sticky, {0.05, box});
  SimConfig sim;
  sim.seed = 40004;
  sim.T = 5e3;
  sim.n_paths = 16;
  sim.start_state = *chain.grid()->nearest({0.0, 0.0});
  const auto ind = sticky_indicator(chain);
  const double burn = sim.T / 10.0;
  const auto per = run_chain_visitors(
      chain, sim,
      [&](std::size_t) { return TimeAverage<std::uint32_t, StateTable>(StateTable{ind}, burn, sim.T); }, opt.threads);
  RunningStats st;
  for (const auto& a : per) st.add(a.value());
  const Estimate e = estimate(st);
  const double cont = continuum_sejour_ratio(rho, sticky, box);
  r.checks.push_back(detail::gate("simulated fraction vs continuum ratio", e.mean, cont, "|rel diff| <= 0.10",
                                  std::abs(e.mean - cont) <= 0.10 * cont));
  r.checks.push_back(detail::info("chain pi-ratio", chain.sticky_ratio(), cont));
  r.checks.push_back(detail::info("CI half-width", e.ci_halfwidth));
  return r;
}

inline CriterionResult coefficient_recovery(const Options& opt = {}) {
  CriterionResult r{5, "drift and diffusion recovery", false, {}, 0.0};
  const Density rho = Density::gaussian(1);
  const StickyStructure sticky = detail::atom_at_origin(1.0);
  const TruncationBox box = TruncationBox::cube(1, 6.0);
  const double h = 0.02;
  const JumpChain chain = build_chain(rho, sticky, {h, box});
  SimConfig sim;
  sim.seed = 50005;
  sim.T = 2e4;
  sim.n_paths = 32;
  sim.start_state = *chain.grid()->nearest(point1(0.0));
  const double burn = sim.T / 10.0;
  std::vector<ProbeCell> cells;
  for (double x : {-1.0, -0.5, 0.5, 1.0}) cells.push_back({point1(x), h / 2});
  validate_probe_cells(cells, sticky, box, h);
  const double lag = 0.5, step = 0.01;
  const double small_lag = 0.005;
  struct Pair {
    ByCoordinate<IncrementMoments> main, small;
    void hold(std::uint32_t s, double t0, double t1) {
      main.hold(s, t0, t1);
      small.hold(s, t0, t1);
    }
  };
  const auto per = run_chain_visitors(
      chain, sim,
      [&](std::size_t) {
        return Pair{{&chain, IncrementMoments(1, step, lag, burn, sim.T, cells)},
                    {&chain, IncrementMoments(1, small_lag, small_lag, burn, sim.T, cells)}};
      },
      opt.threads);
  std::vector<IncrementMoments> main, small;
  for (const auto& p : per) {
    main.push_back(p.main.inner);
    small.push_back(p.small.inner);
  }
  const auto rep = moment_report(main, lag);
  const auto rep_small = moment_report(small, small_lag);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double x = cells[c].center[0];
    const double drift_target = -2.0 * x;
    const std::string at = "@" + detail::fmt(x, 3);
    r.checks.push_back(detail::gate("drift" + at + " (lag 0.5)", rep[c].drift[0], drift_target, "within 10%",
                                    !rep[c].insufficient &&
                                        std::abs(rep[c].drift[0] - drift_target) <= 0.10 * std::abs(drift_target)));
    r.checks.push_back(detail::gate("diffusion" + at + " (lag 0.5)", rep[c].diffusion[0], 2.0, "within 5%",
                                    !rep[c].insufficient && std::abs(rep[c].diffusion[0] - 2.0) <= 0.10));
  }
  // Diagnostics: closed-form lag-0.5 moments of the Ornstein-Uhlenbeck motion
  // with the atom ignored, and the same estimators at a short lag. Time spent
  // at the atom lowers the lag-0.5 variance below the OU value.
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double x = cells[c].center[0];
    const std::string at = "@" + detail::fmt(x, 3);
    r.checks.push_back(detail::info("lag-0.5 drift of OU without atom" + at,
                                    x * (std::exp(-2.0 * lag) - 1.0) / lag));
    r.checks.push_back(detail::info("drift" + at + " (lag 0.005)", rep_small[c].drift[0], -2.0 * x, "within 10%"));
    r.checks.push_back(detail::info("diffusion" + at + " (lag 0.005)", rep_small[c].diffusion[0], 2.0, "within 5%"));
  }
  r.checks.push_back(detail::info("lag-0.5 diffusion of OU without atom", (1.0 - std::exp(-4.0 * lag)) / (2.0 * lag)));
  return r;
}

inline CriterionResult cross_sampler(const Options& opt = {}) {
  CriterionResult r{6, "time-change vs chain", false, {}, 0.0};
  const Density rho = Density::constant(1);
  const double h = 0.02, ball = 0.05, T = 1.0;
  const std::size_t n = 1000;
  struct Ball {
    double r;
    double operator()(double x) const { return std::abs(x) <= r + 1e-12 ? 1.0 : 0.0; }
  };
  auto run_pair = [&](double w_tc, std::size_t paths, std::uint64_t seed, std::vector<double>* chain_x1,
                      std::vector<double>* tc_x1) {
    const StickyStructure sticky = detail::atom_at_origin(chain_weight_for_timechange(w_tc));
    const JumpChain chain = build_chain(rho, sticky, {h, TruncationBox::cube(1, 6.0)});
    const auto in_ball = restrict_to_states(chain, [&](const Point& x) { return std::abs(x[0]) <= ball + 1e-12 ? 1.0 : 0.0; });
    SimConfig sim;
    sim.seed = seed;
    sim.T = T;
    sim.n_paths = paths;
    sim.start_state = *chain.grid()->nearest(point1(0.0));
    struct ChainV {
      TimeAverage<std::uint32_t, StateTable> avg;
      detail::FinalValue<std::uint32_t> last;
      void hold(std::uint32_t s, double t0, double t1) {
        avg.hold(s, t0, t1);
        last.hold(s, t0, t1);
      }
    };
    const auto cv = run_chain_visitors(
        chain, sim, [&](std::size_t) { return ChainV{{StateTable{in_ball}, 0.0, T}, {}}; }, opt.threads);
    TimeChangeParams tc;
    tc.w = w_tc;
    tc.dt = 1e-6;
    tc.eps = 5.0 * std::sqrt(tc.dt);
    SimConfig tsim = sim;
    tsim.seed = seed + 1;
    struct TcV {
      TimeAverage<double, Ball> avg;
      detail::FinalValue<double> last;
      void hold(double x, double t0, double t1) {
        avg.hold(x, t0, t1);
        last.hold(x, t0, t1);
      }
    };
    const auto tv = run_timechange_visitors(
        tc, tsim, [&](std::size_t) { return TcV{{Ball{ball}, 0.0, T}, {}}; }, opt.threads);
    RunningStats a, b;
    for (const auto& v : cv) {
      a.add(v.avg.value());
      if (chain_x1) chain_x1->push_back(chain.coordinate(v.last.value)[0]);
    }
    for (const auto& v : tv) {
      b.add(v.avg.value());
      // Project onto the chain lattice so both laws live on the same atoms.
      if (tc_x1) tc_x1->push_back(std::round(v.last.value / h) * h);
    }
    return std::pair{estimate(a), estimate(b)};
  };
  std::vector<double> cx, tx;
  const auto [chain_ball, tc_ball] = run_pair(0.5, n, 60006, &cx, &tx);
  const double rel = std::abs(tc_ball.mean - chain_ball.mean) / chain_ball.mean;
  r.checks.push_back(detail::gate("small-ball fraction, time-change w=0.5 vs chain w=1", tc_ball.mean, chain_ball.mean,
                                  "|rel diff| <= 0.15", rel <= 0.15));
  const double ks = ks_two_sample(cx, tx);
  r.checks.push_back(detail::gate("KS distance of X_1", ks, 0.05, "< 0.05", ks < 0.05));
  // Monotonicity of the matched fractions in the stickiness.
  const auto [c_lo, t_lo] = run_pair(0.25, 250, 60106, nullptr, nullptr);
  const auto [c_hi, t_hi] = run_pair(1.0, 250, 60206, nullptr, nullptr);
  const bool monotone = c_lo.mean < chain_ball.mean && chain_ball.mean < c_hi.mean && t_lo.mean < tc_ball.mean &&
                        tc_ball.mean < t_hi.mean;
  r.checks.push_back(detail::gate("fractions increase with w in both samplers (w_tc = 0.25, 0.5, 1)",
                                  monotone ? 1.0 : 0.0, 1.0, "monotone", monotone));
  r.checks.push_back(detail::info("chain fraction at w_tc=0.25 / 1", c_lo.mean, c_hi.mean));
  r.checks.push_back(detail::info("time-change fraction at w_tc=0.25 / 1", t_lo.mean, t_hi.mean));
  return r;
}

inline CriterionResult permeability(const Options& opt = {}) {
  CriterionResult r{7, "permeability", false, {}, 0.0};
  const Density rho = Density::gaussian(1);
  const StickyStructure sticky = detail::atom_at_origin(1.0);
  const JumpChain chain = build_chain(rho, sticky, {0.05, TruncationBox::cube(1, 6.0)});
  const auto labels = chain_side_labels(chain, sticky);
  SimConfig sim;
  sim.seed = 70007;
  sim.T = 2e3;
  sim.n_paths = 64;
  sim.start_state = *chain.grid()->nearest(point1(0.0));
  const auto per = run_chain_visitors(
      chain, sim, [&](std::size_t) { return detail::CheckpointCrossings(labels, 1, 1e3); }, opt.threads);
  std::vector<std::uint64_t> first, full;
  for (const auto& v : per) {
    first.push_back(v.first());
    full.push_back(v.inner.counter.total());
  }
  const auto s1 = summarize_crossings(first), s2 = summarize_crossings(full);
  r.checks.push_back(detail::gate("min crossings at T=1e3", static_cast<double>(s1.min), 10, ">= 10", s1.min >= 10));
  const double growth = s2.mean / s1.mean;
  r.checks.push_back(detail::gate("mean(T=2e3) / mean(T=1e3)", growth, 1.5, ">= 1.5", growth >= 1.5));
  r.checks.push_back(detail::info("mean crossings at T=1e3", s1.mean));
  return r;
}

inline CriterionResult fukushima(const Options& opt = {}) {
  CriterionResult r{8, "Fukushima decomposition", false, {}, 0.0};
  const Density rho = Density::gaussian(1);
  const StickyStructure sticky = detail::atom_at_origin(1.0);
  const JumpChain chain = build_chain(rho, sticky, {0.02, TruncationBox::cube(1, 6.0)});
  const std::vector<std::string> ids{"abs_poly", "asym_kink"};
  std::vector<FukushimaTables> tables;
  for (const auto& id : ids) tables.push_back(fukushima_tables(chain, *catalog::find(id, sticky), rho, sticky));
  SimConfig sim;
  sim.seed = 80008;
  sim.T = 1e3;
  sim.n_paths = 128;
  sim.start_state = *chain.grid()->nearest(point1(0.0));
  struct Both {
    FukushimaPath a, b;
    void hold(std::uint32_t s, double t0, double t1) {
      a.hold(s, t0, t1);
      b.hold(s, t0, t1);
    }
  };
  auto per = run_chain_visitors(
      chain, sim,
      [&](std::size_t) {
        return Both{{tables[0].f, tables[0].Lf, tables[0].gamma, sim.T, 100},
                    {tables[1].f, tables[1].Lf, tables[1].gamma, sim.T, 100}};
      },
      opt.threads);
  std::vector<FukushimaPath> pa, pb;
  for (auto& v : per) {
    v.a.finish();
    v.b.finish();
    pa.push_back(v.a);
    pb.push_back(v.b);
  }
  for (const auto& rep : {fukushima_report(ids[0], pa), fukushima_report(ids[1], pb)}) {
    r.checks.push_back(detail::gate("mean M_T (" + rep.function + ")", rep.mean_M.mean, 0.0,
                                    "|mean| <= 3 CI = " + detail::fmt(3.0 * rep.mean_M.ci_halfwidth, 3),
                                    std::abs(rep.mean_M.mean) <= 3.0 * rep.mean_M.ci_halfwidth));
    r.checks.push_back(detail::gate("Var(M_T) / E<M>_T (" + rep.function + ")", rep.ratio, 1.0, "in [0.9, 1.1]",
                                    rep.ratio >= 0.9 && rep.ratio <= 1.1));
    r.checks.push_back(detail::info("ratio from the plain sample variance (" + rep.function + ")", rep.ratio_naive, 1.0));
  }
  return r;
}

inline CriterionResult structural(const Options& opt = {}) {
  CriterionResult r{9, "structural invariants", false, {}, 0.0};
  const std::vector<JumpChain> chains{
      build_chain(Density::gaussian(1), detail::atom_at_origin(1.0), {0.02, TruncationBox::cube(1, 6.0)}),
      build_chain(Density::constant(1), detail::atom_at_origin(1.0), {0.1, TruncationBox::cube(1, 5.0)}),
      build_chain(Density::gaussian(2), StickyStructure::rectangle({-1.0, 1.0, -1.0, 1.0}, 1.0),
                  {0.05, TruncationBox::cube(2, 4.0)})};
  double rev = 0.0, rows = 0.0;
  bool valid = true;
  for (const auto& c : chains) {
    const auto d = c.diagnostics();
    rev = std::max(rev, d.max_reversibility_error);
    rows = std::max(rows, d.max_row_sum);
    valid = valid && d.all_rates_valid;
  }
  r.checks.push_back(detail::gate("max reversibility error", rev, 1e-13, "<= 1e-13", rev <= 1e-13));
  r.checks.push_back(detail::gate("max row sum", rows, 1e-12, "<= 1e-12", rows <= 1e-12));
  r.checks.push_back(detail::gate("rates nonnegative and finite", valid, 1, "all", valid));

  const JumpChain& small = chains[1];
  SimConfig sim;
  sim.seed = 90009;
  sim.T = 50.0;
  sim.n_paths = 8;
  sim.start_state = *small.grid()->nearest(point1(0.0));
  const auto a = simulate_chain(small, sim, 1);
  const auto b = simulate_chain(small, sim, std::max(2u, opt.threads));
  bool same = a == b;
  std::vector<PathSample> c;
  batch_simulate(small, sim, 4, 4, [&](const PathSample& p) { c.push_back(p); });
  batch_simulate(small, sim, 0, 4, [&](const PathSample& p) { c.push_back(p); });
  for (std::size_t i = 0; i < 4; ++i) same = same && c[i] == a[i + 4] && c[i + 4] == a[i];
  TimeChangeParams tc;
  tc.dt = 1e-5;
  SimConfig tsim;
  tsim.seed = 90010;
  tsim.T = 0.05;
  tsim.n_paths = 3;
  same = same && simulate_timechange_sticky_bm(tc, tsim, 1) == simulate_timechange_sticky_bm(tc, tsim, 2);
  r.checks.push_back(detail::gate("bit-identical reruns", same, 1, "identical", same));

  const JumpChain& big = chains[0];
  sim.T = 100.0;
  sim.n_paths = 16;
  sim.start_state = *big.grid()->nearest(point1(0.0));
  const auto cons = run_chain_visitors(big, sim, [](std::size_t) { return detail::Conservation{}; }, opt.threads);
  bool alive = true;
  for (const auto& v : cons) alive = alive && v.contiguous && v.end == sim.T && std::abs(v.total - sim.T) <= 1e-9 * sim.T;
  r.checks.push_back(detail::gate("every path runs to T", alive, 1, "all", alive));
  return r;
}

// ---------------------------------------------------------------------------

struct Entry {
  int id;
  bool slow;
  std::function<CriterionResult(const Options&)> run;
};

inline const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{
      {1, false, generator_symmetry}, {2, false, chain_exactness}, {3, false, sejour_1d},
      {4, true, sejour_2d},           {5, false, coefficient_recovery}, {6, false, cross_sampler},
      {7, false, permeability},       {8, false, fukushima},      {9, false, structural},
  };
  return r;
}

inline CriterionResult run_one(int id, const Options& opt = {}) {
  for (const auto& e : registry())
    if (e.id == id) {
      const auto t0 = std::chrono::steady_clock::now();
      CriterionResult res = e.run(opt);
      res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return res;
    }
  fail(Errc::configuration, "no acceptance criterion " + std::to_string(id));
}

inline void print(std::ostream& os, const CriterionResult& r) {
  os << (r.pass() ? "PASS" : "FAIL") << "  C" << r.id << "  " << r.title << "  (" << std::fixed
     << std::setprecision(1) << r.seconds << " s)" << std::defaultfloat << '\n';
  for (const auto& c : r.checks) {
    os << "      " << (c.informational ? "info" : (c.pass ? "ok  " : "bad ")) << "  " << c.name << " = "
       << detail::fmt(c.value, 8);
    if (!c.rule.empty() || !std::isnan(c.target)) {
      os << "  [";
      if (!std::isnan(c.target)) os << "target " << detail::fmt(c.target, 8);
      if (!c.rule.empty()) os << (std::isnan(c.target) ? "" : ", ") << c.rule;
      os << "]";
    }
    os << '\n';
  }
}

/// Report rows in the shared CSV schema; one row per gating check.
inline std::vector<ReportRow> to_rows(const CriterionResult& r) {
  std::vector<ReportRow> rows;
  for (const auto& c : r.checks) {
    ReportRow row;
    row.experiment_id = "acceptance_c" + std::to_string(r.id);
    row.statistic = c.informational ? "info:" + c.name : c.name;
    for (char& ch : row.statistic)
      if (ch == ',') ch = ';';
    row.value = c.value;
    row.theoretical = c.target;
    row.pass = c.pass;
    rows.push_back(row);
  }
  return rows;
}

/// Criteria run by default; slow ones only with `full`.
inline std::vector<int> default_ids(bool full) {
  std::vector<int> ids;
  for (const auto& e : registry())
    if (full || !e.slow) ids.push_back(e.id);
  return ids;
}

/// Runs the given criteria, printing each as it finishes. Returns true iff
/// every criterion passed.
inline bool run_matrix(const std::vector<int>& ids, const Options& opt, std::ostream& os,
                       std::vector<ReportRow>* rows = nullptr) {
  bool ok = true;
  int passed = 0;
  for (int id : ids) {
    const CriterionResult r = run_one(id, opt);
    print(os, r);
    os.flush();
    ok = ok && r.pass();
    passed += r.pass() ? 1 : 0;
    if (rows) {
      const auto more = to_rows(r);
      rows->insert(rows->end(), more.begin(), more.end());
    }
  }
  os << passed << "/" << ids.size() << " criteria passed\n";
  return ok;
}

}  // namespace sticky_dbm::acceptance
