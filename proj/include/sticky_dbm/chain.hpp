// SPDX-License-Identifier: Apache-2.0
//
// Finite-volume discretization of (E, rho mu) on a uniform grid: a reversible
// continuous-time jump chain with
//
//   pi(x)     = rho mu-mass of the cell of x
//               interior:       rho(x) h^d
//               1D atom:        rho(x) (w_k + h)
//               2D node on dU:  rho(x) (w_surf h + h^2)
//   c(x, y)   = rho((x + y) / 2) h^(d - 2)    for grid neighbours
//   q(x -> y) = c(x, y) / pi(x)
//
// so that pi(x) q(x -> y) = c(x, y) = pi(y) q(y -> x). The outer boundary is
// reflecting: boundary nodes simply have fewer neighbours.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"

namespace sticky_dbm {

enum class StateTag : std::uint8_t { interior, sticky, reflecting };

inline const char* to_string(StateTag t) {
  switch (t) {
    case StateTag::interior: return "interior";
    case StateTag::sticky: return "sticky";
    case StateTag::reflecting: return "reflecting";
  }
  return "?";
}

struct GridSpec {
  double h = 0.1;
  TruncationBox box;
};

/// Integer lattice behind a grid-built chain.
struct GridGeometry {
  int dim = 1;
  double h = 0.1;
  Point half_width{0.0, 0.0};
  std::array<std::uint32_t, 2> n{1, 1};  // nodes per axis

  /// Node coordinates are k * h for integer k, so the origin and aligned
  /// sticky coordinates are hit without rounding drift.
  Point coordinate(std::uint32_t index) const {
    const std::int64_t i = index % n[0], j = index / n[0];
    const auto c0 = static_cast<std::int64_t>(n[0] / 2), c1 = static_cast<std::int64_t>(n[1] / 2);
    return {static_cast<double>(i - c0) * h, dim > 1 ? static_cast<double>(j - c1) * h : 0.0};
  }

  /// Index of the node nearest to x; nullopt if x is outside the box by more
  /// than half a cell.
  std::optional<std::uint32_t> nearest(const Point& x) const {
    std::array<std::int64_t, 2> ij{0, 0};
    for (int a = 0; a < dim; ++a) {
      const double t = std::round((x[a] + half_width[a]) / h);
      if (t < 0 || t >= static_cast<double>(n[a])) return std::nullopt;
      ij[a] = static_cast<std::int64_t>(t);
    }
    return static_cast<std::uint32_t>(ij[0] + ij[1] * static_cast<std::int64_t>(n[0]));
  }
};

struct Transition {
  std::uint32_t to = 0;
  double rate = 0.0;
  double cumulative = 0.0;  // running sum of rates up to and including this one
};

class JumpChain {
 public:
  struct Edge {
    std::uint32_t a = 0, b = 0;
    double conductance = 0.0;
  };

  /// Builds a chain from stationary weights and symmetric conductances.
  /// Throws internal_consistency if any structural invariant fails.
  JumpChain(int dim, std::vector<Point> coords, std::vector<StateTag> tags, std::vector<double> pi,
            std::vector<Edge> edges, std::optional<GridGeometry> grid = std::nullopt)
      : dim_(dim),
        coords_(std::move(coords)),
        tags_(std::move(tags)),
        pi_(std::move(pi)),
        edges_(std::move(edges)),
        grid_(grid) {
    const std::size_t n = pi_.size();
    require(n > 0 && coords_.size() == n && tags_.size() == n, Errc::contract_violation,
            "chain parts have inconsistent sizes");
    for (double p : pi_)
      require(p > 0.0 && std::isfinite(p), Errc::internal_consistency, "stationary weights must be positive");
    std::vector<std::uint32_t> degree(n, 0);
    for (const auto& e : edges_) {
      require(e.a < n && e.b < n && e.a != e.b, Errc::contract_violation, "edge endpoints out of range");
      require(e.conductance >= 0.0 && std::isfinite(e.conductance), Errc::internal_consistency,
              "conductances must be nonnegative and finite");
      ++degree[e.a];
      ++degree[e.b];
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
    transitions_.resize(offsets_[n]);
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      transitions_[fill[e.a]++] = {e.b, e.conductance / pi_[e.a], 0.0};
      transitions_[fill[e.b]++] = {e.a, e.conductance / pi_[e.b], 0.0};
    }
    exit_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      for (std::uint32_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        c += transitions_[k].rate;
        transitions_[k].cumulative = c;
      }
      exit_[i] = c;
    }
    pi_total_ = std::accumulate(pi_.begin(), pi_.end(), 0.0);
    const auto diag = diagnostics();
    require(diag.max_reversibility_error <= 1e-13, Errc::internal_consistency, "chain is not reversible");
    require(diag.max_row_sum <= 1e-12, Errc::internal_consistency, "generator rows do not sum to zero");
    require(diag.all_rates_valid, Errc::internal_consistency, "negative or non-finite rate");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return pi_.size(); }
  const Point& coordinate(std::size_t i) const { return coords_[i]; }
  StateTag tag(std::size_t i) const { return tags_[i]; }
  bool is_sticky(std::size_t i) const { return tags_[i] == StateTag::sticky; }
  double pi(std::size_t i) const { return pi_[i]; }
  std::span<const double> pi() const { return pi_; }
  double pi_total() const { return pi_total_; }
  double exit_rate(std::size_t i) const { return exit_[i]; }
  std::span<const Transition> transitions(std::size_t i) const {
    return {transitions_.data() + offsets_[i], transitions_.data() + offsets_[i + 1]};
  }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::optional<GridGeometry>& grid() const { return grid_; }
  double h() const { return grid_ ? grid_->h : 0.0; }

  double rate(std::size_t from, std::size_t to) const {
    for (const auto& t : transitions(from))
      if (t.to == to) return t.rate;
    return 0.0;
  }

  struct Diagnostics {
    double max_reversibility_error = 0.0;  // relative, per edge
    double max_row_sum = 0.0;              // |sum_y q(x->y) - exit(x)|
    bool all_rates_valid = true;
  };

  Diagnostics diagnostics() const {
    Diagnostics d;
    for (const auto& e : edges_) {
      const double fwd = pi_[e.a] * rate(e.a, e.b), bwd = pi_[e.b] * rate(e.b, e.a);
      const double scale = std::max({std::abs(fwd), std::abs(bwd), std::numeric_limits<double>::min()});
      d.max_reversibility_error = std::max(d.max_reversibility_error, std::abs(fwd - bwd) / scale);
    }
    for (std::size_t i = 0; i < size(); ++i) {
      double s = 0.0;
      for (const auto& t : transitions(i)) {
        if (!(t.rate >= 0.0) || !std::isfinite(t.rate)) d.all_rates_valid = false;
        s += t.rate;
      }
      d.max_row_sum = std::max(d.max_row_sum, std::abs(s - exit_[i]));
    }
    return d;
  }

  /// Weighted average sum f(x) pi(x) / sum pi(x).
  double stationary_average(std::span<const double> f) const {
    require(f.size() == size(), Errc::contract_violation, "state vector size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += f[i] * pi_[i];
    return s / pi_total_;
  }

  /// Stationary mass of the sticky states over the total.
  double sticky_ratio() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      if (is_sticky(i)) s += pi_[i];
    return s / pi_total_;
  }

 private:
  int dim_;
  std::vector<Point> coords_;
  std::vector<StateTag> tags_;
  std::vector<double> pi_;
  std::vector<Edge> edges_;
  std::optional<GridGeometry> grid_;
  std::vector<std::uint32_t> offsets_;
  std::vector<Transition> transitions_;
  std::vector<double> exit_;
  double pi_total_ = 0.0;
};

namespace detail {

inline bool on_lattice(double x, double h) { return std::abs(x - std::round(x / h) * h) <= 1e-12; }

inline std::int64_t lattice_index(double x, double L, double h) { return std::llround((x + L) / h); }

}  // namespace detail

/// Checks every GridSpec precondition against the sticky set. Throws
/// Errc::configuration with a message naming the offending value.
inline void validate_grid(const GridSpec& grid, const StickyStructure& sticky) {
  grid.box.validate();
  const double h = grid.h;
  require(h > 0.0 && std::isfinite(h), Errc::configuration, "grid spacing must be positive");
  require(sticky.dim() == grid.box.dim, Errc::configuration, "sticky set and grid dimensions differ");
  for (int a = 0; a < grid.box.dim; ++a) {
    const double L = grid.box.half_width[a];
    const double cells = L / h;
    require(std::abs(cells - std::round(cells)) <= 1e-9 * std::max(1.0, cells), Errc::configuration,
            "box half-width " + std::to_string(L) + " is not a multiple of h");
  }
  auto check_coordinate = [&](double x, int axis) {
    if (!detail::on_lattice(x, h))
      fail(Errc::configuration, "sticky coordinate " + std::to_string(x) + " is not a multiple of h");
    const double L = grid.box.half_width[axis];
    const auto idx = detail::lattice_index(x, L, h);
    const auto n = detail::lattice_index(L, L, h) + 1;
    if (idx < 2 || idx > n - 3)
      fail(Errc::configuration, "sticky coordinate " + std::to_string(x) + " is within two cells of the box edge");
  };
  if (sticky.is_points()) {
    require(h < sticky.min_gap() / 2.0, Errc::configuration, "grid spacing must be below half the minimal atom gap");
    for (const auto& p : sticky.sticky_points()) check_coordinate(p.x, 0);
  } else {
    const auto& r = sticky.rect();
    check_coordinate(r.a1, 0);
    check_coordinate(r.b1, 0);
    check_coordinate(r.a2, 1);
    check_coordinate(r.b2, 1);
  }
}

inline JumpChain build_chain(const Density& density, const StickyStructure& sticky, const GridSpec& grid) {
  require(density.dim() == grid.box.dim, Errc::configuration, "density and grid dimensions differ");
  validate_grid(grid, sticky);
  const int dim = grid.box.dim;
  const double h = grid.h;
  GridGeometry geo;
  geo.dim = dim;
  geo.h = h;
  geo.half_width = grid.box.half_width;
  for (int a = 0; a < dim; ++a)
    geo.n[a] = static_cast<std::uint32_t>(detail::lattice_index(grid.box.half_width[a], grid.box.half_width[a], h) + 1);
  const std::size_t count = static_cast<std::size_t>(geo.n[0]) * geo.n[1];
  require(count < (std::size_t{1} << 31), Errc::configuration, "grid too large");

  std::vector<Point> coords(count);
  std::vector<StateTag> tags(count, StateTag::interior);
  std::vector<double> pi(count);
  std::vector<double> sticky_mass(count, 0.0);  // S-mass of the cell, before rho

  for (std::uint32_t i = 0; i < count; ++i) coords[i] = geo.coordinate(i);

  if (sticky.is_points()) {
    for (const auto& p : sticky.sticky_points()) {
      const auto idx = static_cast<std::uint32_t>(detail::lattice_index(p.x, grid.box.half_width[0], h));
      tags[idx] = StateTag::sticky;
      sticky_mass[idx] = p.weight;
      coords[idx][0] = p.x;
    }
  } else {
    const auto& r = sticky.rect();
    const auto L = grid.box.half_width;
    const auto i1 = detail::lattice_index(r.a1, L[0], h), i2 = detail::lattice_index(r.b1, L[0], h);
    const auto j1 = detail::lattice_index(r.a2, L[1], h), j2 = detail::lattice_index(r.b2, L[1], h);
    for (auto j = j1; j <= j2; ++j)
      for (auto i = i1; i <= i2; ++i) {
        if (i != i1 && i != i2 && j != j1 && j != j2) continue;
        const auto idx = static_cast<std::uint32_t>(i + j * geo.n[0]);
        tags[idx] = StateTag::sticky;
        if (i == i1) coords[idx][0] = r.a1;
        if (i == i2) coords[idx][0] = r.b1;
        if (j == j1) coords[idx][1] = r.a2;
        if (j == j2) coords[idx][1] = r.b2;
        // Half an edge segment on either side of the node; corners collect
        // one half from each incident edge.
        sticky_mass[idx] = sticky.w_surf() * h;
      }
  }

  const double cell = dim == 1 ? h : h * h;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (tags[i] != StateTag::sticky) {
      const std::uint32_t ix = i % geo.n[0], iy = i / geo.n[0];
      const bool edge = ix == 0 || ix + 1 == geo.n[0] || (dim > 1 && (iy == 0 || iy + 1 == geo.n[1]));
      if (edge) tags[i] = StateTag::reflecting;
    }
    pi[i] = density.value(coords[i]) * (sticky_mass[i] + cell);
  }

  std::vector<JumpChain::Edge> edges;
  edges.reserve(count * dim);
  const double hpow = dim == 1 ? 1.0 / h : 1.0;  // h^(d-2)
  auto add_edge = [&](std::uint32_t a, std::uint32_t b) {
    const Point mid{0.5 * (coords[a][0] + coords[b][0]), 0.5 * (coords[a][1] + coords[b][1])};
    edges.push_back({a, b, density.value(mid) * hpow});
  };
  for (std::uint32_t j = 0; j < geo.n[1]; ++j)
    for (std::uint32_t i = 0; i < geo.n[0]; ++i) {
      const std::uint32_t idx = i + j * geo.n[0];
      if (i + 1 < geo.n[0]) add_edge(idx, idx + 1);
      if (dim > 1 && j + 1 < geo.n[1]) add_edge(idx, idx + geo.n[0]);
    }
  return JumpChain(dim, std::move(coords), std::move(tags), std::move(pi), std::move(edges), geo);
}

/// (Q f)(x) = sum_y q(x -> y) (f(y) - f(x)).
inline std::vector<double> discrete_generator_apply(const JumpChain& chain, std::span<const double> f) {
  require(f.size() == chain.size(), Errc::contract_violation, "state vector size mismatch");
  std::vector<double> out(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    double s = 0.0;
    for (const auto& t : chain.transitions(i)) s += t.rate * (f[t.to] - f[i]);
    out[i] = s;
  }
  return out;
}

/// E_h(f, g) = sum over edges c(x, y) (f(x) - f(y)) (g(x) - g(y)).
inline double discrete_energy(const JumpChain& chain, std::span<const double> f, std::span<const double> g) {
  require(f.size() == chain.size() && g.size() == chain.size(), Errc::contract_violation, "state vector size mismatch");
  double s = 0.0;
  for (const auto& e : chain.edges()) s += e.conductance * (f[e.a] - f[e.b]) * (g[e.a] - g[e.b]);
  return s;
}

/// <u, v>_pi.
inline double pi_inner(const JumpChain& chain, std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) s += u[i] * v[i] * chain.pi(i);
  return s;
}

/// Samples a function at every state.
template <class F>
std::vector<double> restrict_to_states(const JumpChain& chain, const F& f) {
  std::vector<double> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) out[i] = f(chain.coordinate(i));
  return out;
}

struct ChainSummary {
  std::size_t states = 0, interior = 0, sticky = 0, reflecting = 0, edges = 0;
  double pi_total = 0.0, pi_sticky = 0.0;
  double pi_interior_min = 0.0, pi_interior_max = 0.0;
  double rate_min = 0.0, rate_max = 0.0;
  double exit_max = 0.0;
  double sticky_ratio = 0.0;
  JumpChain::Diagnostics diagnostics;
};

inline ChainSummary summarize(const JumpChain& chain) {
  ChainSummary s;
  s.states = chain.size();
  s.edges = chain.edges().size();
  s.pi_total = chain.pi_total();
  s.pi_interior_min = std::numeric_limits<double>::infinity();
  s.rate_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    switch (chain.tag(i)) {
      case StateTag::interior:
        ++s.interior;
        s.pi_interior_min = std::min(s.pi_interior_min, chain.pi(i));
        s.pi_interior_max = std::max(s.pi_interior_max, chain.pi(i));
        break;
      case StateTag::sticky:
        ++s.sticky;
        s.pi_sticky += chain.pi(i);
        break;
      case StateTag::reflecting: ++s.reflecting; break;
    }
    for (const auto& t : chain.transitions(i)) {
      s.rate_min = std::min(s.rate_min, t.rate);
      s.rate_max = std::max(s.rate_max, t.rate);
    }
    s.exit_max = std::max(s.exit_max, chain.exit_rate(i));
  }
  if (s.interior == 0) s.pi_interior_min = 0.0;
  if (s.edges == 0) s.rate_min = 0.0;
  s.sticky_ratio = s.pi_sticky / s.pi_total;
  s.diagnostics = chain.diagnostics();
  return s;
}

}  // namespace sticky_dbm
