// SPDX-License-Identifier: Apache-2.0
//
// Path statistics. Each statistic is a visitor over holding intervals (see
// samplers.hpp); the functions taking recorded paths replay them through the
// same visitors. Monte Carlo intervals are 95% normal intervals over
// per-path values.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/dirichlet_form.hpp"
#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"
#include "sticky_dbm/measure.hpp"
#include "sticky_dbm/quadrature.hpp"
#include "sticky_dbm/samplers.hpp"
#include "sticky_dbm/test_function.hpp"

namespace sticky_dbm {

// ---------------------------------------------------------------------------
// Accumulators

/// Welford mean/variance; `merge` is exact up to rounding and associative
/// enough for a fixed merge order.
struct RunningStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double tot = na + nb;
    mean += d * nb / tot;
    m2 += o.m2 + d * d * na * nb / tot;
    n += o.n;
  }

  /// Sample variance (n - 1 denominator); 0 for fewer than two values.
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  /// Population variance (n denominator).
  double population_variance() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
};

struct Estimate {
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  std::uint64_t n = 0;

  bool covers(double target) const { return std::abs(mean - target) <= ci_halfwidth; }
};

inline constexpr double kZ95 = 1.959963984540054;

inline Estimate estimate(const RunningStats& s) {
  Estimate e;
  e.mean = s.mean;
  e.n = s.n;
  e.ci_halfwidth = s.n > 1 ? kZ95 * std::sqrt(s.variance() / static_cast<double>(s.n))
                           : std::numeric_limits<double>::infinity();
  return e;
}

inline Estimate estimate(std::span<const double> values) {
  RunningStats s;
  for (double v : values) s.add(v);
  return estimate(s);
}

// ---------------------------------------------------------------------------
// Time averages

/// (1 / (T - burn)) * integral over [burn, T] of f(X_t) dt for one path.
template <class State, class F>
struct TimeAverage {
  F f;
  double burn = 0.0;
  double T = 1.0;
  double integral = 0.0;

  TimeAverage(F fn, double burn_in, double horizon) : f(std::move(fn)), burn(burn_in), T(horizon) {
    require(horizon > burn_in, Errc::contract_violation, "empty averaging window: burn-in must be below T");
  }

  void hold(State s, double t0, double t1) {
    const double lo = std::max(t0, burn);
    if (t1 <= lo) return;
    const double v = f(s);
    if (!std::isfinite(v)) fail(Errc::numerical_failure, "observable is not finite at a visited state");
    integral += v * (t1 - lo);
  }

  double value() const { return integral / (T - burn); }
};

/// Observable given by its values on chain states.
struct StateTable {
  std::span<const double> values;
  double operator()(std::uint32_t s) const { return values[s]; }
};

inline std::vector<double> sticky_indicator(const JumpChain& chain) {
  std::vector<double> v(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) v[i] = chain.is_sticky(i) ? 1.0 : 0.0;
  return v;
}

/// Per-path time averages of a state observable over recorded chain paths.
inline std::vector<double> path_averages(const std::vector<PathSample>& paths, std::span<const double> f,
                                         double burn) {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    require(p.sampler == SamplerId::chain, Errc::contract_violation, "state observable needs chain paths");
    TimeAverage<std::uint32_t, StateTable> avg(StateTable{f}, burn, p.horizon);
    replay(p, avg);
    out.push_back(avg.value());
  }
  return out;
}

inline Estimate ergodic_average(const std::vector<PathSample>& paths, std::span<const double> f, double burn) {
  require(!paths.empty(), Errc::contract_violation, "no paths");
  return estimate(path_averages(paths, f, burn));
}

/// Time fraction in sticky states; the ergodic average of the indicator of A.
inline Estimate sejour_fraction(const JumpChain& chain, const std::vector<PathSample>& paths, double burn) {
  const auto ind = sticky_indicator(chain);
  return ergodic_average(paths, ind, burn);
}

/// Chain-level target sum f pi / sum pi.
inline double chain_average(const JumpChain& chain, std::span<const double> f) { return chain.stationary_average(f); }

/// Continuum target int f rho dmu / rho mu(box).
inline double continuum_average(const Density& density, const StickyStructure& sticky, const ScalarField& f,
                                const TruncationBox& box, const QuadratureOptions& opt = {}) {
  return integrate_rho_mu(density, sticky, f, box.box(), opt) / rho_mu_mass(density, sticky, box, opt);
}

/// Continuum sojourn ratio rho S(A) / rho mu(box).
inline double continuum_sejour_ratio(const Density& density, const StickyStructure& sticky, const TruncationBox& box,
                                     const QuadratureOptions& opt = {}) {
  const double s = sticky_integral(density, sticky, [](const Point&) { return 1.0; }, box.box(), opt);
  return s / rho_mu_mass(density, sticky, box, opt);
}

// ---------------------------------------------------------------------------
// Occupancy

/// Time spent in each chain state on [burn, T].
struct Occupancy {
  std::vector<double> time;
  double burn = 0.0;

  Occupancy(std::size_t states, double burn_in) : time(states, 0.0), burn(burn_in) {}

  void hold(std::uint32_t s, double t0, double t1) {
    const double lo = std::max(t0, burn);
    if (t1 > lo) time[s] += t1 - lo;
  }

  void merge(const Occupancy& o) {
    for (std::size_t i = 0; i < time.size(); ++i) time[i] += o.time[i];
  }
};

/// Total variation between normalized occupancy and pi / sum pi.
inline double occupancy_tv(const JumpChain& chain, const Occupancy& occ) {
  double total = 0.0;
  for (double t : occ.time) total += t;
  require(total > 0.0, Errc::contract_violation, "empty occupancy");
  double tv = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) tv += std::abs(occ.time[i] / total - chain.pi(i) / chain.pi_total());
  return 0.5 * tv;
}

// ---------------------------------------------------------------------------
// Crossings

/// Side of a point relative to A: in 1D one label per atom (sign of x - x_k),
/// in 2D a single label (-1 in U, 0 on dU, +1 outside).
inline void side_labels(const StickyStructure& sticky, const Point& x, std::vector<int>& out) {
  out.clear();
  if (sticky.is_points()) {
    for (const auto& p : sticky.sticky_points()) out.push_back(x[0] < p.x ? -1 : (x[0] > p.x ? 1 : 0));
  } else {
    out.push_back(sticky.inside(x) ? -1 : (sticky.on_boundary(x) ? 0 : 1));
  }
}

/// Counts side flips: a crossing is recorded whenever the nonzero side label
/// differs from the last nonzero label, so visits to A in between do not
/// count on their own.
struct CrossingCounter {
  std::vector<int> last;
  std::vector<std::uint64_t> per_component;
  std::vector<int> scratch;

  explicit CrossingCounter(std::size_t components) : last(components, 0), per_component(components, 0) {}

  void observe(std::span<const int> labels) {
    for (std::size_t k = 0; k < last.size(); ++k) {
      const int l = labels[k];
      if (l == 0) continue;
      if (last[k] != 0 && l != last[k]) ++per_component[k];
      last[k] = l;
    }
  }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : per_component) s += c;
    return s;
  }
};

inline std::size_t crossing_components(const StickyStructure& sticky) {
  return sticky.is_points() ? sticky.sticky_points().size() : 1;
}

/// Crossing visitor over chain states; labels are precomputed per state.
struct ChainCrossings {
  const std::vector<int>* labels;  // state-major, `components` per state
  std::size_t components;
  CrossingCounter counter;

  ChainCrossings(const std::vector<int>& table, std::size_t comps)
      : labels(&table), components(comps), counter(comps) {}

  void hold(std::uint32_t s, double, double) {
    counter.observe(std::span<const int>(labels->data() + s * components, components));
  }
};

inline std::vector<int> chain_side_labels(const JumpChain& chain, const StickyStructure& sticky) {
  const std::size_t comps = crossing_components(sticky);
  std::vector<int> table;
  table.reserve(chain.size() * comps);
  std::vector<int> tmp;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain.is_sticky(i)) {
      // Sticky states sit exactly on A; avoid rounding in the label.
      side_labels(sticky, chain.coordinate(i), tmp);
      if (sticky.is_points()) {
        const auto k = sticky.atom_at(chain.coordinate(i)[0], 1e-9);
        for (std::size_t c = 0; c < comps; ++c)
          if (k && c == *k) tmp[c] = 0;
      } else {
        tmp[0] = 0;
      }
    } else {
      side_labels(sticky, chain.coordinate(i), tmp);
    }
    table.insert(table.end(), tmp.begin(), tmp.end());
  }
  return table;
}

/// Crossing visitor over 1D positions (time-change sampler).
struct PositionCrossings {
  StickyStructure sticky;
  CrossingCounter counter;
  std::vector<int> scratch;

  explicit PositionCrossings(const StickyStructure& s) : sticky(s), counter(crossing_components(s)) {}

  void hold(double x, double, double) {
    side_labels(sticky, point1(x), scratch);
    counter.observe(scratch);
  }
};

/// Per-path crossing totals for recorded paths.
inline std::vector<std::uint64_t> crossing_count(const std::vector<PathSample>& paths, const StickyStructure& sticky,
                                                 const JumpChain* chain = nullptr) {
  std::vector<std::uint64_t> out;
  std::vector<int> table;
  if (chain) table = chain_side_labels(*chain, sticky);
  for (const auto& p : paths) {
    if (p.sampler == SamplerId::chain) {
      require(chain != nullptr, Errc::contract_violation, "chain paths need the chain for crossing labels");
      ChainCrossings v(table, crossing_components(sticky));
      replay(p, v);
      out.push_back(v.counter.total());
    } else {
      PositionCrossings v(sticky);
      replay(p, v);
      out.push_back(v.counter.total());
    }
  }
  return out;
}

struct CrossingSummary {
  std::uint64_t min = 0;
  double mean = 0.0;
};

inline CrossingSummary summarize_crossings(std::span<const std::uint64_t> counts) {
  CrossingSummary s;
  if (counts.empty()) return s;
  s.min = *std::min_element(counts.begin(), counts.end());
  double tot = 0.0;
  for (auto c : counts) tot += static_cast<double>(c);
  s.mean = tot / static_cast<double>(counts.size());
  return s;
}

// ---------------------------------------------------------------------------
// Increment moments

struct ProbeCell {
  Point center{0.0, 0.0};
  double half_width = 0.0;

  bool contains(const Point& x, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (std::abs(x[a] - center[a]) > half_width * (1.0 + 1e-9)) return false;
    return true;
  }
};

/// Rejects probe cells closer than 3h to A or to the box boundary.
inline void validate_probe_cells(std::span<const ProbeCell> cells, const StickyStructure& sticky,
                                 const TruncationBox& box, double h) {
  for (const auto& c : cells) {
    require(nearest_sticky_distance(sticky, c.center) >= 3.0 * h - 1e-12, Errc::contract_violation,
            "probe cell closer than 3h to the sticky set");
    for (int a = 0; a < box.dim; ++a)
      require(box.half_width[a] - std::abs(c.center[a]) >= 3.0 * h - 1e-12, Errc::contract_violation,
              "probe cell closer than 3h to the truncation boundary");
  }
}

struct CellMoments {
  std::array<RunningStats, 2> increment;  // per coordinate
};

/// Conditional moments of X_{t + lag} - X_t given X_t in a probe cell, with
/// t on the snapshot grid k * step, k * step >= burn.
struct IncrementMoments {
  int dim = 1;
  double step = 0.01;
  std::uint64_t lag_steps = 1;
  double burn = 0.0;
  double T = 1.0;
  std::vector<ProbeCell> cells;
  std::vector<CellMoments> moments;
  std::vector<Point> ring;
  std::uint64_t next = 0;

  IncrementMoments(int d, double snapshot_step, double lag, double burn_in, double horizon,
                   std::vector<ProbeCell> probe)
      : dim(d), step(snapshot_step), burn(burn_in), T(horizon), cells(std::move(probe)) {
    require(step > 0.0 && lag > 0.0, Errc::contract_violation, "lag and snapshot step must be positive");
    const double m = lag / step;
    require(std::abs(m - std::round(m)) <= 1e-9 * std::max(1.0, m), Errc::contract_violation,
            "lag must be a multiple of the recording step");
    lag_steps = static_cast<std::uint64_t>(std::llround(m));
    require(lag_steps >= 1, Errc::contract_violation, "lag below the recording step");
    moments.resize(cells.size());
    ring.resize(lag_steps + 1);
  }

  void snapshot(const Point& x) {
    const std::uint64_t k = next++;
    ring[k % ring.size()] = x;
    if (k < lag_steps) return;
    const std::uint64_t k0 = k - lag_steps;
    if (static_cast<double>(k0) * step < burn) return;
    const Point& x0 = ring[k0 % ring.size()];
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (cells[c].contains(x0, dim))
        for (int a = 0; a < dim; ++a) moments[c].increment[a].add(x[a] - x0[a]);
  }

  void hold(const Point& x, double /*t0*/, double t1) {
    for (;;) {
      const double t = static_cast<double>(next) * step;
      if (t > T * (1.0 + 1e-15)) return;
      if (t < t1 || t1 >= T)
        snapshot(x);
      else
        return;
    }
  }

  void merge(const IncrementMoments& o) {
    for (std::size_t c = 0; c < moments.size(); ++c)
      for (int a = 0; a < 2; ++a) moments[c].increment[a].merge(o.moments[c].increment[a]);
  }
};

/// Adapts a position visitor to chain states.
template <class V>
struct ByCoordinate {
  const JumpChain* chain;
  V inner;
  void hold(std::uint32_t s, double t0, double t1) { inner.hold(chain->coordinate(s), t0, t1); }
};

/// Adapts a position visitor to the 1D time-change sampler.
template <class V>
struct ByPosition {
  V inner;
  void hold(double x, double t0, double t1) { inner.hold(point1(x), t0, t1); }
};

struct CellMomentReport {
  ProbeCell cell;
  std::uint64_t samples = 0;
  std::array<double, 2> drift{0.0, 0.0};
  std::array<double, 2> diffusion{0.0, 0.0};
  std::array<double, 2> drift_ci{0.0, 0.0};  // from per-path drift estimates
  bool insufficient = false;
};

inline constexpr std::uint64_t kDefaultMinSamples = 200;

/// Pools per-path increment moments. Drift = mean / lag, diffusion =
/// variance / lag (population variance of the pooled increments).
inline std::vector<CellMomentReport> moment_report(const std::vector<IncrementMoments>& per_path, double lag,
                                                   std::uint64_t min_samples = kDefaultMinSamples) {
  require(!per_path.empty(), Errc::contract_violation, "no paths");
  const auto& first = per_path.front();
  std::vector<CellMomentReport> out(first.cells.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].cell = first.cells[c];
    std::array<RunningStats, 2> pooled;
    std::array<RunningStats, 2> path_drifts;
    for (const auto& p : per_path)
      for (int a = 0; a < first.dim; ++a) {
        const auto& r = p.moments[c].increment[a];
        pooled[a].merge(r);
        if (r.n > 0) path_drifts[a].add(r.mean / lag);
      }
    out[c].samples = pooled[0].n;
    out[c].insufficient = pooled[0].n < min_samples;
    for (int a = 0; a < first.dim; ++a) {
      out[c].drift[a] = pooled[a].mean / lag;
      out[c].diffusion[a] = pooled[a].population_variance() / lag;
      out[c].drift_ci[a] = estimate(path_drifts[a]).ci_halfwidth;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fukushima decomposition

enum class GeneratorSampling {
  cell_average,  // rho mu-average of L f over each state's cell
  pointwise      // off_A_part at the node, on_A_part at sticky nodes
};

/// Generator of f evaluated per chain state. Cell averaging makes
/// sum_x pi(x) Lf(x) equal int L f d(rho mu) = 0 up to quadrature error,
/// which removes the O(h) drift bias of pointwise sampling.
inline std::vector<double> state_generator_values(const JumpChain& chain, const TestFunction& f,
                                                  const Density& density, const StickyStructure& sticky,
                                                  GeneratorSampling mode = GeneratorSampling::cell_average,
                                                  const QuadratureOptions& opt = {1e-13, 1e-11, 40}) {
  const GeneratorValue L = apply_generator(f, density, sticky);
  const int d = chain.dim();
  const double h = chain.h();
  std::vector<double> out(chain.size(), 0.0);
  const Box supp = f.support();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Point x = chain.coordinate(i);
    if (mode == GeneratorSampling::pointwise) {
      if (!chain.is_sticky(i)) {
        out[i] = L.off_A_part(x);
      } else {
        const double w = sticky_weight_at(sticky, x);
        out[i] = w > 0.0 ? L.on_A_part(x) : 0.0;
      }
      continue;
    }
    require(h > 0.0, Errc::contract_violation, "cell averaging needs a grid chain");
    const Box cell = d == 1 ? Box::interval(x[0] - h / 2, x[0] + h / 2)
                            : Box::rect(x[0] - h / 2, x[0] + h / 2, x[1] - h / 2, x[1] + h / 2);
    const Box region = cell.intersect(supp);
    double num = 0.0;
    if (!region.degenerate())
      num += lebesgue_integral(density, sticky, L.off_A_part, region, f.breaks_x(), f.breaks_y(), opt);
    if (chain.is_sticky(i)) {
      if (d == 1) {
        num += density.value(x) * L.on_A_jump(x);
      } else {
        // Jump integrated against rho dH^1 over the node's share of dU.
        const auto& r = sticky.rect();
        const Box share = Box::rect(std::max(cell.lo[0], r.a1), std::min(cell.hi[0], r.b1),
                                    std::max(cell.lo[1], r.a2), std::min(cell.hi[1], r.b2));
        auto edge = [&](auto&& pt, double lo, double hi) {
          if (hi <= lo) return 0.0;
          return integrate([&](double s) { return L.on_A_jump(pt(s)) * density.value(pt(s)); }, lo, hi, {}, opt);
        };
        for (double y : {r.a2, r.b2})
          if (y >= cell.lo[1] && y <= cell.hi[1])
            num += edge([y](double s) { return Point{s, y}; }, share.lo[0], share.hi[0]);
        for (double xx : {r.a1, r.b1})
          if (xx >= cell.lo[0] && xx <= cell.hi[0])
            num += edge([xx](double s) { return Point{xx, s}; }, share.lo[1], share.hi[1]);
      }
    }
    out[i] = num / chain.pi(i);
  }
  return out;
}

/// One path of the decomposition f(X_t) - f(X_0) = M_t + int_0^t Lf(X_s) ds.
/// [0, T] is cut into `blocks` equal pieces; the martingale increments over
/// the blocks are orthogonal, so sum_k dM_k^2 is an unbiased per-path
/// estimate of E[M_T^2] with far less noise than M_T^2 itself.
struct FukushimaPath {
  std::span<const double> f;
  std::span<const double> Lf;
  std::span<const double> gamma;  // bracket rate per state
  double T = 1.0;
  std::uint32_t blocks = 1;

  std::uint32_t block = 0;
  double f_start = 0.0;
  bool started = false;
  double drift_in_block = 0.0;
  double M = 0.0;
  double sum_sq = 0.0;
  double bracket = 0.0;
  std::uint32_t last = 0;

  FukushimaPath(std::span<const double> fv, std::span<const double> Lv, std::span<const double> gv, double horizon,
                std::uint32_t n_blocks)
      : f(fv), Lf(Lv), gamma(gv), T(horizon), blocks(std::max<std::uint32_t>(1, n_blocks)) {}

  double edge(std::uint32_t k) const { return T * static_cast<double>(k) / static_cast<double>(blocks); }

  void close_block(std::uint32_t s) {
    const double dM = f[s] - f_start - drift_in_block;
    M += dM;
    sum_sq += dM * dM;
    f_start = f[s];
    drift_in_block = 0.0;
  }

  void hold(std::uint32_t s, double t0, double t1) {
    if (!started) {
      f_start = f[s];
      started = true;
    }
    bracket += gamma[s] * (t1 - t0);
    double t = t0;
    while (block + 1 < blocks && edge(block + 1) < t1) {
      const double e = edge(block + 1);
      drift_in_block += Lf[s] * (e - t);
      close_block(s);
      t = e;
      ++block;
    }
    drift_in_block += Lf[s] * (t1 - t);
    last = s;
  }

  /// Closes the final block at T; call once after the path ends.
  void finish() { close_block(last); }
};

struct FukushimaReport {
  std::string function;
  Estimate mean_M;               // target 0
  double var_M = 0.0;            // block estimator of Var(M_T)
  double var_M_naive = 0.0;      // sample variance of M_T
  Estimate bracket;              // E int gamma(X_s) ds
  double ratio = 0.0;            // var_M / bracket.mean, target 1
  double ratio_naive = 0.0;
  std::uint64_t n_paths = 0;
};

inline FukushimaReport fukushima_report(const std::string& name, std::span<const FukushimaPath> paths) {
  require(!paths.empty(), Errc::contract_violation, "no paths");
  RunningStats m, sq, br;
  for (const auto& p : paths) {
    m.add(p.M);
    sq.add(p.sum_sq);
    br.add(p.bracket);
  }
  FukushimaReport r;
  r.function = name;
  r.n_paths = m.n;
  r.mean_M = estimate(m);
  r.var_M = sq.mean - m.mean * m.mean;
  r.var_M_naive = m.variance();
  r.bracket = estimate(br);
  r.ratio = r.bracket.mean > 0.0 ? r.var_M / r.bracket.mean : std::numeric_limits<double>::quiet_NaN();
  r.ratio_naive = r.bracket.mean > 0.0 ? r.var_M_naive / r.bracket.mean : std::numeric_limits<double>::quiet_NaN();
  return r;
}

/// State tables used by the Fukushima visitor.
struct FukushimaTables {
  std::vector<double> f, Lf, gamma;
};

inline FukushimaTables fukushima_tables(const JumpChain& chain, const TestFunction& f, const Density& density,
                                        const StickyStructure& sticky,
                                        GeneratorSampling mode = GeneratorSampling::cell_average) {
  if (const auto& g = chain.grid()) {
    const Box supp = f.support();
    for (int a = 0; a < chain.dim(); ++a)
      require(supp.lo[a] >= -g->half_width[a] && supp.hi[a] <= g->half_width[a], Errc::contract_violation,
              "test function support exceeds the truncation box");
  }
  FukushimaTables t;
  t.f = restrict_to_states(chain, [&](const Point& x) { return f.value(x); });
  t.Lf = state_generator_values(chain, f, density, sticky, mode);
  const auto rate = bracket_rate(f, sticky);
  t.gamma.resize(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) t.gamma[i] = chain.is_sticky(i) ? 0.0 : rate(chain.coordinate(i));
  return t;
}

/// Fukushima statistics over recorded chain paths.
inline FukushimaReport fukushima_residual(const std::vector<PathSample>& paths, const TestFunction& f,
                                          const JumpChain& chain, const Density& density,
                                          const StickyStructure& sticky, std::uint32_t blocks = 100,
                                          GeneratorSampling mode = GeneratorSampling::cell_average) {
  const FukushimaTables t = fukushima_tables(chain, f, density, sticky, mode);
  std::vector<FukushimaPath> acc;
  for (const auto& p : paths) {
    require(p.sampler == SamplerId::chain && !p.snapshots, Errc::contract_violation,
            "the decomposition needs event-level chain paths");
    FukushimaPath v(t.f, t.Lf, t.gamma, p.horizon, blocks);
    replay(p, v);
    v.finish();
    acc.push_back(v);
  }
  return fukushima_report(f.name(), acc);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// sup |F_a - F_b| over the pooled sample; ties advance both sides together.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), Errc::contract_violation, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// sup |F_n - F| for a continuous reference CDF.
inline double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  require(!x.empty(), Errc::contract_violation, "empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic p-value P(D_n > d) with the Stephens small-sample correction.
inline double kolmogorov_pvalue(double d, double n_effective) {
  const double sn = std::sqrt(n_effective);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Reports

/// Occupation summary for a set of chain paths.
struct OccupancyReport {
  Estimate sejour;
  double chain_ratio = 0.0;
  double continuum_ratio = std::numeric_limits<double>::quiet_NaN();
  CrossingSummary crossings;
  std::uint64_t n_paths = 0;
  double T = 0.0;
  double h = 0.0;
};

inline OccupancyReport occupancy_report(const JumpChain& chain, const std::vector<PathSample>& paths,
                                        const StickyStructure& sticky, double burn,
                                        std::optional<double> continuum = std::nullopt) {
  OccupancyReport r;
  r.sejour = sejour_fraction(chain, paths, burn);
  r.chain_ratio = chain.sticky_ratio();
  if (continuum) r.continuum_ratio = *continuum;
  const auto counts = crossing_count(paths, sticky, &chain);
  r.crossings = summarize_crossings(counts);
  r.n_paths = paths.size();
  r.T = paths.empty() ? 0.0 : paths.front().horizon;
  r.h = chain.h();
  return r;
}

}  // namespace sticky_dbm
