// SPDX-License-Identifier: Apache-2.0
//
// Path simulation.
//
// Both samplers report a path to a visitor as a sequence of holding
// intervals `hold(state, t_begin, t_end)` that tile [0, T]. Statistics are
// visitors too, so long runs never materialize their event lists. A
// `PathSample` is only built when a recorder visitor is attached.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/error.hpp"
#include "sticky_dbm/parallel.hpp"
#include "sticky_dbm/rng.hpp"

namespace sticky_dbm {

enum class Recording { events, snapshots };
enum class SamplerId { chain, timechange };

inline const char* to_string(SamplerId s) { return s == SamplerId::chain ? "chain" : "timechange"; }

struct SimConfig {
  std::uint64_t seed = 1;
  double T = 1.0;
  std::size_t n_paths = 1;
  std::uint32_t start_state = 0;
  Recording recording = Recording::events;
  double snapshot_dt = 0.0;

  void validate(std::size_t state_count) const {
    require(T > 0.0 && std::isfinite(T), Errc::configuration, "horizon T must be positive");
    require(n_paths >= 1, Errc::configuration, "n_paths must be at least 1");
    require(start_state < state_count, Errc::configuration, "start state outside the truncation box");
    if (recording == Recording::snapshots)
      require(snapshot_dt > 0.0, Errc::configuration, "snapshot recording needs a positive step");
  }
};

/// Recorded path. For chain paths `states` holds state indices; for the
/// time-change sampler `positions` holds coordinates. Values are piecewise
/// constant: the value at events[i] is held on [times[i], times[i + 1]) and
/// the last one until `horizon`.
struct PathSample {
  std::vector<double> times;
  std::vector<std::uint32_t> states;
  std::vector<double> positions;
  double horizon = 0.0;
  SamplerId sampler = SamplerId::chain;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  bool snapshots = false;

  std::size_t size() const { return times.size(); }
  bool operator==(const PathSample&) const = default;
};

/// Records every holding interval start.
template <class State>
struct EventRecorder {
  std::vector<double> times;
  std::vector<State> values;
  void hold(State s, double t0, double /*t1*/) {
    times.push_back(t0);
    values.push_back(s);
  }
};

/// Records the value at times 0, dt, 2 dt, ... <= T.
template <class State>
struct SnapshotRecorder {
  double dt = 1.0;
  double T = 1.0;
  std::uint64_t next = 0;
  std::vector<double> times;
  std::vector<State> values;

  SnapshotRecorder(double step, double horizon) : dt(step), T(horizon) {}

  void hold(State s, double /*t0*/, double t1) {
    for (;;) {
      const double t = static_cast<double>(next) * dt;
      if (t > T) return;
      if (t < t1 || (t1 >= T && t <= T)) {
        times.push_back(t);
        values.push_back(s);
        ++next;
      } else {
        return;
      }
    }
  }
};

/// Forwards each holding interval to several visitors.
template <class... V>
struct Fanout {
  std::tuple<V&...> targets;
  explicit Fanout(V&... v) : targets(v...) {}
  template <class S>
  void hold(S s, double t0, double t1) {
    std::apply([&](auto&... v) { (v.hold(s, t0, t1), ...); }, targets);
  }
};

/// Exact competing-exponentials simulation of one path on [0, T]: at state x
/// hold for Exp(exit rate), then jump to y with probability q(x->y) / exit.
template <class Visitor>
void simulate_chain_path(const JumpChain& chain, std::uint32_t start, double T, std::uint64_t seed, Visitor& visitor) {
  Engine rng(seed);
  std::uint32_t s = start;
  double t = 0.0;
  for (;;) {
    const double exit = chain.exit_rate(s);
    if (!(exit > 0.0)) {
      if (!chain.transitions(s).empty())
        fail(Errc::internal_consistency, "state " + std::to_string(s) + " has neighbours but zero exit rate");
      visitor.hold(s, t, T);
      return;
    }
    const double next = t + standard_exponential(rng) / exit;
    if (next >= T) {
      visitor.hold(s, t, T);
      return;
    }
    visitor.hold(s, t, next);
    const auto trs = chain.transitions(s);
    const double u = uniform01(rng) * exit;
    std::uint32_t to = trs.back().to;
    for (const auto& tr : trs)
      if (u < tr.cumulative) {
        to = tr.to;
        break;
      }
    s = to;
    t = next;
  }
}

inline PathSample simulate_chain_sample(const JumpChain& chain, const SimConfig& cfg, std::uint64_t index) {
  PathSample p;
  p.horizon = cfg.T;
  p.sampler = SamplerId::chain;
  p.seed = cfg.seed;
  p.index = index;
  const std::uint64_t seed = path_seed(cfg.seed, index);
  if (cfg.recording == Recording::events) {
    EventRecorder<std::uint32_t> rec;
    simulate_chain_path(chain, cfg.start_state, cfg.T, seed, rec);
    p.times = std::move(rec.times);
    p.states = std::move(rec.values);
  } else {
    SnapshotRecorder<std::uint32_t> rec(cfg.snapshot_dt, cfg.T);
    simulate_chain_path(chain, cfg.start_state, cfg.T, seed, rec);
    p.times = std::move(rec.times);
    p.states = std::move(rec.values);
    p.snapshots = true;
  }
  return p;
}

inline std::vector<PathSample> simulate_chain(const JumpChain& chain, const SimConfig& cfg, unsigned threads = 1) {
  cfg.validate(chain.size());
  return map_indexed(cfg.n_paths, threads, [&](std::size_t i) { return simulate_chain_sample(chain, cfg, i); });
}

/// Streams paths [first, first + count) to `sink` in index order. Path i is
/// the same no matter which range or thread count produced it.
inline void batch_simulate(const JumpChain& chain, const SimConfig& cfg, std::uint64_t first, std::uint64_t count,
                           const std::function<void(const PathSample&)>& sink, unsigned threads = 1) {
  cfg.validate(chain.size());
  const std::uint64_t chunk = std::max<std::uint64_t>(1, 4ULL * std::max(1u, threads));
  for (std::uint64_t lo = first; lo < first + count; lo += chunk) {
    const std::uint64_t n = std::min(chunk, first + count - lo);
    auto paths = map_indexed(n, threads, [&](std::size_t k) { return simulate_chain_sample(chain, cfg, lo + k); });
    for (const auto& p : paths) sink(p);
  }
}

/// Runs one freshly made visitor per path and returns them in index order.
template <class MakeVisitor>
auto run_chain_visitors(const JumpChain& chain, const SimConfig& cfg, MakeVisitor&& make, unsigned threads = 1) {
  cfg.validate(chain.size());
  return map_indexed(cfg.n_paths, threads, [&](std::size_t i) {
    auto v = make(i);
    simulate_chain_path(chain, cfg.start_state, cfg.T, path_seed(cfg.seed, i), v);
    return v;
  });
}

/// Parameters of the 1D time-change sampler (rho = 1, A = {0}).
struct TimeChangeParams {
  double w = 1.0;      // stickiness of the local-time clock
  double dt = 1e-5;    // step of the driving motion
  double eps = 0.0;    // local-time window; 0 selects 5 sqrt(dt)
  double x0 = 0.0;

  double window() const { return eps > 0.0 ? eps : 5.0 * std::sqrt(dt); }

  void validate() const {
    require(w >= 0.0 && std::isfinite(w), Errc::configuration, "time-change stickiness must be nonnegative");
    require(dt > 0.0 && dt <= 1e-4, Errc::configuration, "driving step must lie in (0, 1e-4]");
    const double e = window();
    require(e > 0.0 && e <= 10.0 * std::sqrt(dt), Errc::configuration,
            "local-time window must lie in (0, 10 sqrt(dt)]");
  }
};

/// Chain atom weight that matches time-change stickiness w. The driving
/// motion has quadratic variation 2t, so its semimartingale local time is
/// twice its occupation density and the extra clock w * l_t equals the time
/// an atom of weight 2w would hold.
inline double chain_weight_for_timechange(double w) { return 2.0 * w; }

/// Sticky Brownian motion by time change. The driving motion B (variance 2t)
/// runs on a grid of step dt; its local time at 0 is estimated by
///   l_t = (1 / (2 eps)) * int 1{|B_s| <= eps} d<B>_s,
/// the clock is gamma_s = s + w l_s and X_t = B at gamma^{-1}(t). Each driving
/// step becomes one holding interval [gamma_k, gamma_{k+1}) at B_k.
template <class Visitor>
void simulate_timechange_path(const TimeChangeParams& params, double T, std::uint64_t seed, Visitor& visitor) {
  Engine rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double eps = params.window();
  const double scale = std::sqrt(2.0 * params.dt);
  const double sticky_rate = 1.0 + params.w / eps;  // 1 + w * (1/(2 eps)) * 2
  double B = params.x0;
  double gamma = 0.0;
  while (gamma < T) {
    const double dgamma = params.dt * (std::abs(B) <= eps ? sticky_rate : 1.0);
    const double next = gamma + dgamma;
    visitor.hold(B, gamma, std::min(next, T));
    B += scale * normal(rng);
    gamma = next;
  }
}

/// The driving motion alone, sampled at k dt for k dt < T.
inline std::vector<double> driving_motion(double x0, double T, double dt, std::uint64_t seed) {
  Engine rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(2.0 * dt);
  std::vector<double> out;
  double B = x0;
  for (std::uint64_t k = 0; static_cast<double>(k) * dt < T; ++k) {
    out.push_back(B);
    B += scale * normal(rng);
  }
  return out;
}

inline PathSample simulate_timechange_sample(const TimeChangeParams& params, const SimConfig& cfg,
                                             std::uint64_t index) {
  PathSample p;
  p.horizon = cfg.T;
  p.sampler = SamplerId::timechange;
  p.seed = cfg.seed;
  p.index = index;
  const std::uint64_t seed = path_seed(cfg.seed, index);
  if (cfg.recording == Recording::events) {
    EventRecorder<double> rec;
    simulate_timechange_path(params, cfg.T, seed, rec);
    p.times = std::move(rec.times);
    p.positions = std::move(rec.values);
  } else {
    SnapshotRecorder<double> rec(cfg.snapshot_dt, cfg.T);
    simulate_timechange_path(params, cfg.T, seed, rec);
    p.times = std::move(rec.times);
    p.positions = std::move(rec.values);
    p.snapshots = true;
  }
  return p;
}

inline std::vector<PathSample> simulate_timechange_sticky_bm(const TimeChangeParams& params, const SimConfig& cfg,
                                                             unsigned threads = 1) {
  params.validate();
  require(cfg.T > 0.0 && cfg.n_paths >= 1, Errc::configuration, "invalid simulation config");
  return map_indexed(cfg.n_paths, threads,
                     [&](std::size_t i) { return simulate_timechange_sample(params, cfg, i); });
}

template <class MakeVisitor>
auto run_timechange_visitors(const TimeChangeParams& params, const SimConfig& cfg, MakeVisitor&& make,
                             unsigned threads = 1) {
  params.validate();
  require(cfg.T > 0.0 && cfg.n_paths >= 1, Errc::configuration, "invalid simulation config");
  return map_indexed(cfg.n_paths, threads, [&](std::size_t i) {
    auto v = make(i);
    simulate_timechange_path(params, cfg.T, path_seed(cfg.seed, i), v);
    return v;
  });
}

/// Feeds a recorded path to a visitor.
template <class Visitor>
void replay(const PathSample& path, Visitor& visitor) {
  const std::size_t n = path.times.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double t1 = i + 1 < n ? path.times[i + 1] : path.horizon;
    if (path.sampler == SamplerId::chain)
      visitor.hold(path.states[i], path.times[i], t1);
    else
      visitor.hold(path.positions[i], path.times[i], t1);
  }
}

}  // namespace sticky_dbm
