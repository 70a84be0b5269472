// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/samplers.hpp"
#include "sticky_dbm/statistics.hpp"

using namespace sticky_dbm;

namespace {

const StickyStructure kAtom = StickyStructure::points({{0.0, 1.0}});

JumpChain small_chain() {
  return build_chain(Density::constant(1), kAtom, {0.1, TruncationBox::cube(1, 2.0)});
}

std::uint32_t origin(const JumpChain& c) { return *c.grid()->nearest(point1(0.0)); }

SimConfig config(std::uint64_t seed, double T, std::size_t n, std::uint32_t start) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.T = T;
  cfg.n_paths = n;
  cfg.start_state = start;
  return cfg;
}

struct Interval {
  double s, t0, t1;
  bool operator==(const Interval&) const = default;
};

template <class S>
struct IntervalLog {
  std::vector<Interval> v;
  void hold(S s, double t0, double t1) { v.push_back({static_cast<double>(s), t0, t1}); }
};

}  // namespace

TEST(ChainSampler, HoldingTimesAtStickyNodeAreExponential) {
  const JumpChain c = small_chain();
  const std::uint32_t s0 = origin(c);
  const double rate = c.exit_rate(s0);
  EXPECT_NEAR(1.0 / rate, 0.055, 1e-12);
  std::vector<double> holds;
  std::size_t left = 0, right = 0;
  for (std::uint64_t i = 0; holds.size() < 4000; ++i) {
    IntervalLog<std::uint32_t> log;
    simulate_chain_path(c, s0, 50.0, path_seed(9, i), log);
    for (std::size_t k = 0; k + 1 < log.v.size(); ++k)
      if (log.v[k].s == s0) {
        holds.push_back(log.v[k].t1 - log.v[k].t0);
        (log.v[k + 1].s < s0 ? left : right) += 1;
      }
  }
  const double d = ks_one_sample(holds, [rate](double t) { return 1.0 - std::exp(-rate * t); });
  EXPECT_GT(kolmogorov_pvalue(d, static_cast<double>(holds.size())), 0.001) << "D = " << d;
  const double n = static_cast<double>(left + right);
  EXPECT_NEAR(static_cast<double>(left) / n, 0.5, 4.0 * 0.5 / std::sqrt(n));
}

TEST(ChainSampler, EventsTileTheHorizonAndMoveToNeighbours) {
  const JumpChain c = small_chain();
  const PathSample p = simulate_chain_sample(c, config(3, 20.0, 1, origin(c)), 0);
  ASSERT_FALSE(p.times.empty());
  EXPECT_EQ(p.times.front(), 0.0);
  EXPECT_EQ(p.states.front(), origin(c));
  for (std::size_t k = 1; k < p.size(); ++k) {
    EXPECT_GT(p.times[k], p.times[k - 1]);
    EXPECT_GT(c.rate(p.states[k - 1], p.states[k]), 0.0);
  }
  EXPECT_LT(p.times.back(), p.horizon);
}

TEST(ChainSampler, DeterministicAcrossThreadsAndRanges) {
  const JumpChain c = small_chain();
  const SimConfig cfg = config(42, 5.0, 12, origin(c));
  const auto a = simulate_chain(c, cfg, 1);
  const auto b = simulate_chain(c, cfg, 3);
  EXPECT_EQ(a, b);
  std::vector<PathSample> batched;
  batch_simulate(c, cfg, 0, 5, [&](const PathSample& p) { batched.push_back(p); }, 2);
  batch_simulate(c, cfg, 5, 7, [&](const PathSample& p) { batched.push_back(p); }, 1);
  EXPECT_EQ(a, batched);
  EXPECT_EQ(simulate_chain_sample(c, cfg, 7), a[7]);
  SimConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(simulate_chain(c, other, 1)[0].times, a[0].times);
}

TEST(ChainSampler, SnapshotsAreOnTheGrid) {
  const JumpChain c = small_chain();
  SimConfig cfg = config(5, 2.0, 1, origin(c));
  cfg.recording = Recording::snapshots;
  cfg.snapshot_dt = 0.25;
  const PathSample p = simulate_chain_sample(c, cfg, 0);
  ASSERT_EQ(p.size(), 9u);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_DOUBLE_EQ(p.times[k], 0.25 * static_cast<double>(k));
  EXPECT_TRUE(p.snapshots);
  // Each snapshot agrees with the event path at that time.
  SimConfig ev = cfg;
  ev.recording = Recording::events;
  const PathSample e = simulate_chain_sample(c, ev, 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto it = std::upper_bound(e.times.begin(), e.times.end(), p.times[k]);
    EXPECT_EQ(p.states[k], e.states[static_cast<std::size_t>(it - e.times.begin()) - 1]);
  }
}

TEST(ChainSampler, ReplayReproducesTheVisitorStream) {
  const JumpChain c = small_chain();
  IntervalLog<std::uint32_t> live;
  simulate_chain_path(c, origin(c), 3.0, path_seed(11, 0), live);
  const PathSample p = simulate_chain_sample(c, config(11, 3.0, 1, origin(c)), 0);
  IntervalLog<std::uint32_t> again;
  replay(p, again);
  EXPECT_EQ(live.v, again.v);
  EXPECT_EQ(live.v.back().t1, 3.0);
}

TEST(ChainSampler, FanoutFeedsEveryVisitor) {
  const JumpChain c = small_chain();
  IntervalLog<std::uint32_t> a, b;
  Fanout<IntervalLog<std::uint32_t>, IntervalLog<std::uint32_t>> both(a, b);
  simulate_chain_path(c, origin(c), 1.0, 1, both);
  EXPECT_FALSE(a.v.empty());
  EXPECT_EQ(a.v, b.v);
}

TEST(ChainSampler, InvalidConfigIsConfigurationError) {
  const JumpChain c = small_chain();
  for (auto mutate : std::vector<std::function<void(SimConfig&)>>{
           [](SimConfig& s) { s.n_paths = 0; }, [](SimConfig& s) { s.T = 0.0; },
           [](SimConfig& s) { s.start_state = 100000; },
           [](SimConfig& s) {
             s.recording = Recording::snapshots;
             s.snapshot_dt = 0.0;
           }}) {
    SimConfig cfg = config(1, 1.0, 1, 0);
    mutate(cfg);
    try {
      simulate_chain(c, cfg);
      ADD_FAILURE() << "expected an error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::configuration);
    }
  }
}

TEST(ChainSampler, IsolatedStateHoldsForever) {
  const JumpChain c(1, {point1(0.0)}, {StateTag::interior}, {1.0}, {});
  IntervalLog<std::uint32_t> log;
  simulate_chain_path(c, 0, 2.0, 1, log);
  ASSERT_EQ(log.v.size(), 1u);
  EXPECT_EQ(log.v[0], (Interval{0.0, 0.0, 2.0}));
}

TEST(TimeChangeSampler, ZeroStickinessIsTheDrivingMotion) {
  TimeChangeParams tc;
  tc.w = 0.0;
  tc.dt = 1e-4;
  SimConfig cfg = config(7, 0.05, 1, 0);
  const PathSample p = simulate_timechange_sample(tc, cfg, 0);
  const auto B = driving_motion(0.0, 0.05, 1e-4, path_seed(7, 0));
  ASSERT_EQ(p.positions.size(), B.size());
  for (std::size_t k = 0; k < B.size(); ++k) {
    EXPECT_EQ(p.positions[k], B[k]);
    EXPECT_NEAR(p.times[k], 1e-4 * static_cast<double>(k), 1e-15);
  }
}

TEST(TimeChangeSampler, ClockIsStrictlyIncreasingAndSlowsNearZero) {
  TimeChangeParams tc;
  tc.w = 1.0;
  tc.dt = 1e-4;
  IntervalLog<double> log;
  simulate_timechange_path(tc, 0.2, 3, log);
  const double eps = tc.window();
  for (std::size_t k = 0; k < log.v.size(); ++k) {
    EXPECT_GT(log.v[k].t1, log.v[k].t0);
    if (k + 1 < log.v.size()) {
      EXPECT_EQ(log.v[k].t1, log.v[k + 1].t0);
      const double expected = std::abs(log.v[k].s) <= eps ? tc.dt * (1.0 + tc.w / eps) : tc.dt;
      EXPECT_NEAR(log.v[k].t1 - log.v[k].t0, expected, 1e-15);
    }
  }
  EXPECT_EQ(log.v.back().t1, 0.2);
}

TEST(TimeChangeSampler, SymmetricAboutTheAtom) {
  TimeChangeParams tc;
  tc.w = 0.5;
  tc.dt = 1e-4;
  SimConfig cfg = config(21, 0.5, 400, 0);
  RunningStats end;
  for (const auto& p : simulate_timechange_sticky_bm(tc, cfg)) end.add(p.positions.back());
  const Estimate e = estimate(end);
  EXPECT_LE(std::abs(e.mean), 1.5 * e.ci_halfwidth);
}

TEST(TimeChangeSampler, StickinessIncreasesSmallBallTime) {
  auto small_ball = [](double w) {
    TimeChangeParams tc;
    tc.w = w;
    tc.dt = 1e-4;
    const SimConfig cfg = config(31, 1.0, 100, 0);
    auto near = [](double x) { return std::abs(x) <= 0.05 ? 1.0 : 0.0; };
    RunningStats s;
    auto v = run_timechange_visitors(tc, cfg, [&](std::size_t) {
      return TimeAverage<double, decltype(near)>(near, 0.0, 1.0);
    });
    for (const auto& a : v) s.add(a.value());
    return s.mean;
  };
  const double a = small_ball(0.0), b = small_ball(0.5), c = small_ball(2.0);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(TimeChangeSampler, ParameterValidation) {
  for (auto p : {TimeChangeParams{-1.0, 1e-5, 0.0, 0.0}, TimeChangeParams{1.0, 1e-3, 0.0, 0.0},
                 TimeChangeParams{1.0, 1e-5, 1.0, 0.0}, TimeChangeParams{1.0, 0.0, 0.0, 0.0}}) {
    try {
      p.validate();
      ADD_FAILURE() << "expected an error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::configuration);
    }
  }
  EXPECT_DOUBLE_EQ(TimeChangeParams{}.window(), 5.0 * std::sqrt(1e-5));
  EXPECT_EQ(chain_weight_for_timechange(0.5), 1.0);
}

TEST(TimeChangeSampler, DeterministicAcrossThreads) {
  TimeChangeParams tc;
  tc.dt = 1e-4;
  const SimConfig cfg = config(8, 0.1, 6, 0);
  EXPECT_EQ(simulate_timechange_sticky_bm(tc, cfg, 1), simulate_timechange_sticky_bm(tc, cfg, 3));
}

TEST(Rng, PathSeedsAreDistinctAndStable) {
  EXPECT_NE(path_seed(1, 0), path_seed(1, 1));
  EXPECT_NE(path_seed(1, 0), path_seed(2, 0));
  static_assert(path_seed(5, 3) == splitmix64(5 + 4 * 0x9E3779B97F4A7C15ULL));
  Engine rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform_open01(rng);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
