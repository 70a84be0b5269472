// SPDX-License-Identifier: Apache-2.0
//
// Densities, sticky sets and boxes. Dimensions 1 and 2 are supported; a
// `Point` always has two slots and the unused one is zero in 1D.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sticky_dbm/error.hpp"

namespace sticky_dbm {

using Point = std::array<double, 2>;

inline Point point1(double x) { return {x, 0.0}; }

inline double dot(const Point& a, const Point& b, int dim) {
  double s = a[0] * b[0];
  if (dim > 1) s += a[1] * b[1];
  return s;
}

inline double norm(const Point& a, int dim) { return std::sqrt(dot(a, a, dim)); }

/// Axis-aligned closed box [lo, hi] in `dim` dimensions.
struct Box {
  int dim = 1;
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  static Box interval(double a, double b) { return {1, {a, 0.0}, {b, 0.0}}; }
  static Box rect(double a1, double b1, double a2, double b2) { return {2, {a1, a2}, {b1, b2}}; }

  bool contains(const Point& x) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }

  bool degenerate() const { return volume() == 0.0; }

  Box intersect(const Box& other) const {
    Box out = *this;
    for (int i = 0; i < dim; ++i) {
      out.lo[i] = std::max(lo[i], other.lo[i]);
      out.hi[i] = std::min(hi[i], other.hi[i]);
      if (out.hi[i] < out.lo[i]) out.hi[i] = out.lo[i];
    }
    return out;
  }
};

/// Symmetric truncation of the state space, [-L_i, L_i] per axis, with a
/// reflecting outer boundary.
struct TruncationBox {
  int dim = 1;
  Point half_width{0.0, 0.0};

  static TruncationBox cube(int dim, double L) {
    TruncationBox b;
    b.dim = dim;
    b.half_width = {L, dim > 1 ? L : 0.0};
    return b;
  }

  Box box() const {
    Box b;
    b.dim = dim;
    for (int i = 0; i < dim; ++i) {
      b.lo[i] = -half_width[i];
      b.hi[i] = half_width[i];
    }
    return b;
  }

  void validate() const {
    require(dim == 1 || dim == 2, Errc::configuration, "truncation box dimension must be 1 or 2");
    for (int i = 0; i < dim; ++i)
      require(half_width[i] > 0.0 && std::isfinite(half_width[i]), Errc::configuration,
              "truncation half-width must be positive");
  }
};

/// Strictly positive C^1 weight rho together with its log-gradient.
class Density {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradientFn = std::function<Point(const Point&)>;

  static Density constant(int dim) {
    return Density(
        dim, "constant", [](const Point&) { return 1.0; }, [](const Point&) { return Point{0.0, 0.0}; },
        /*integrable=*/false, /*bounded=*/true, /*allow_unflagged=*/dim > 1);
  }

  /// exp(-|x|^2).
  static Density gaussian(int dim) {
    return Density(
        dim, "gaussian",
        [dim](const Point& x) { return std::exp(-dot(x, x, dim)); },
        [dim](const Point& x) { return Point{-2.0 * x[0], dim > 1 ? -2.0 * x[1] : 0.0}; },
        /*integrable=*/true, /*bounded=*/true, false);
  }

  static Density custom(int dim, std::string name, ValueFn value, GradientFn log_gradient, bool integrable,
                        bool bounded) {
    return Density(dim, std::move(name), std::move(value), std::move(log_gradient), integrable, bounded, false);
  }

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  bool integrable() const { return integrable_; }
  bool bounded() const { return bounded_; }

  double operator()(const Point& x) const { return value(x); }

  double value(const Point& x) const {
    const double v = value_(x);
    if (!(v > 0.0) || !std::isfinite(v))
      fail(Errc::numerical_failure, "density " + name_ + " is not strictly positive and finite");
    return v;
  }

  Point log_gradient(const Point& x) const { return log_gradient_(x); }

  /// Largest violation of |grad ln rho - FD(ln rho)| <= tol (1 + |grad ln rho|)
  /// measured as the ratio lhs / (1 + |grad|) over `probes` uniform points
  /// of `region`.
  double gradient_consistency(const Box& region, int probes, std::uint64_t seed, double step = 1e-5) const {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
      Point x{0.0, 0.0};
      for (int i = 0; i < dim_; ++i) {
        std::uniform_real_distribution<double> u(region.lo[i], region.hi[i]);
        x[i] = u(rng);
      }
      const Point g = log_gradient(x);
      Point fd{0.0, 0.0};
      for (int i = 0; i < dim_; ++i) {
        Point xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        fd[i] = (std::log(value(xp)) - std::log(value(xm))) / (2.0 * step);
      }
      Point diff{g[0] - fd[0], g[1] - fd[1]};
      worst = std::max(worst, norm(diff, dim_) / (1.0 + norm(g, dim_)));
    }
    return worst;
  }

 private:
  Density(int dim, std::string name, ValueFn value, GradientFn grad, bool integrable, bool bounded,
          bool allow_unflagged)
      : dim_(dim),
        name_(std::move(name)),
        value_(std::move(value)),
        log_gradient_(std::move(grad)),
        integrable_(integrable),
        bounded_(bounded) {
    require(dim == 1 || dim == 2, Errc::contract_violation, "density dimension must be 1 or 2");
    require(static_cast<bool>(value_) && static_cast<bool>(log_gradient_), Errc::contract_violation,
            "density callables must be set");
    if (dim == 1)
      require(integrable || bounded, Errc::contract_violation, "1D density must be integrable or bounded");
    else if (!allow_unflagged)
      require(integrable, Errc::contract_violation, "density must be integrable when d >= 2");
  }

  int dim_;
  std::string name_;
  ValueFn value_;
  GradientFn log_gradient_;
  bool integrable_;
  bool bounded_;
};

struct StickyPoint {
  double x = 0.0;
  double weight = 1.0;
};

struct StickyRectangle {
  double a1 = -1.0, b1 = 1.0, a2 = -1.0, b2 = 1.0;
};

/// The null set A together with its measure S. Either finitely many weighted
/// atoms on the line, or the boundary of an axis-aligned rectangle U carrying
/// a multiple of arc length.
class StickyStructure {
 public:
  struct Points1D {
    std::vector<StickyPoint> points;
  };
  struct RectBoundary2D {
    StickyRectangle rect;
    double w_surf = 1.0;
  };

  static StickyStructure points(std::vector<StickyPoint> pts) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      require(std::isfinite(pts[k].x), Errc::contract_violation, "sticky point must be finite");
      // Zero weight is allowed and means "no stickiness" at that point.
      require(pts[k].weight >= 0.0 && std::isfinite(pts[k].weight), Errc::contract_violation,
              "sticky atom weights must be nonnegative");
      if (k > 0)
        require(pts[k].x > pts[k - 1].x, Errc::contract_violation, "sticky points must be strictly increasing");
    }
    StickyStructure s;
    s.data_ = Points1D{std::move(pts)};
    return s;
  }

  static StickyStructure none_1d() { return points({}); }

  static StickyStructure rectangle(StickyRectangle r, double w_surf) {
    require(r.a1 < r.b1 && r.a2 < r.b2, Errc::contract_violation, "rectangle corners must satisfy a < b");
    require(w_surf >= 0.0 && std::isfinite(w_surf), Errc::contract_violation,
            "surface weight must be nonnegative");
    StickyStructure s;
    s.data_ = RectBoundary2D{r, w_surf};
    return s;
  }

  int dim() const { return is_points() ? 1 : 2; }
  bool is_points() const { return std::holds_alternative<Points1D>(data_); }
  bool is_rectangle() const { return std::holds_alternative<RectBoundary2D>(data_); }

  const std::vector<StickyPoint>& sticky_points() const { return std::get<Points1D>(data_).points; }
  const StickyRectangle& rect() const { return std::get<RectBoundary2D>(data_).rect; }
  double w_surf() const { return std::get<RectBoundary2D>(data_).w_surf; }

  /// Minimal gap between consecutive atoms; +inf with fewer than two atoms.
  double min_gap() const {
    const auto& p = sticky_points();
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < p.size(); ++k) g = std::min(g, p[k].x - p[k - 1].x);
    return g;
  }

  /// Same structure with every weight multiplied by `factor`.
  StickyStructure scaled(double factor) const {
    if (is_points()) {
      auto pts = sticky_points();
      for (auto& p : pts) p.weight *= factor;
      return points(std::move(pts));
    }
    return rectangle(rect(), w_surf() * factor);
  }

  /// Index of the atom located exactly at x (within `tol`), if any.
  std::optional<std::size_t> atom_at(double x, double tol = 1e-12) const {
    const auto& p = sticky_points();
    auto it = std::lower_bound(p.begin(), p.end(), x - tol, [](const StickyPoint& a, double v) { return a.x < v; });
    if (it != p.end() && std::abs(it->x - x) <= tol) return static_cast<std::size_t>(it - p.begin());
    return std::nullopt;
  }

  /// Open rectangle U.
  bool inside(const Point& x) const {
    const auto& r = rect();
    return x[0] > r.a1 && x[0] < r.b1 && x[1] > r.a2 && x[1] < r.b2;
  }

  bool on_boundary(const Point& x) const {
    const auto& r = rect();
    const bool in_x = x[0] >= r.a1 && x[0] <= r.b1;
    const bool in_y = x[1] >= r.a2 && x[1] <= r.b2;
    return (in_y && (x[0] == r.a1 || x[0] == r.b1)) || (in_x && (x[1] == r.a2 || x[1] == r.b2));
  }

  /// Outward unit normals of U at a boundary point: one on an edge, two at a
  /// corner.
  std::vector<Point> outward_normals(const Point& x) const {
    const auto& r = rect();
    std::vector<Point> n;
    const bool in_x = x[0] >= r.a1 && x[0] <= r.b1;
    const bool in_y = x[1] >= r.a2 && x[1] <= r.b2;
    if (in_y && x[0] == r.a1) n.push_back({-1.0, 0.0});
    if (in_y && x[0] == r.b1) n.push_back({1.0, 0.0});
    if (in_x && x[1] == r.a2) n.push_back({0.0, -1.0});
    if (in_x && x[1] == r.b2) n.push_back({0.0, 1.0});
    return n;
  }

  bool contains(const Point& x) const {
    if (is_points()) return atom_at(x[0], 0.0).has_value();
    return on_boundary(x);
  }

  /// Coordinates where A meets axis `axis`; used as forced quadrature splits.
  std::vector<double> breaks(int axis) const {
    if (is_points()) {
      std::vector<double> b;
      if (axis == 0)
        for (const auto& p : sticky_points()) b.push_back(p.x);
      return b;
    }
    const auto& r = rect();
    return axis == 0 ? std::vector<double>{r.a1, r.b1} : std::vector<double>{r.a2, r.b2};
  }

 private:
  StickyStructure() = default;
  std::variant<Points1D, RectBoundary2D> data_;
};

/// Euclidean distance from x to A; +inf if A is empty.
inline double nearest_sticky_distance(const StickyStructure& sticky, const Point& x) {
  if (sticky.is_points()) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : sticky.sticky_points()) d = std::min(d, std::abs(x[0] - p.x));
    return d;
  }
  const auto& r = sticky.rect();
  if (x[0] >= r.a1 && x[0] <= r.b1 && x[1] >= r.a2 && x[1] <= r.b2)
    return std::min({x[0] - r.a1, r.b1 - x[0], x[1] - r.a2, r.b2 - x[1]});
  const double dx = std::max({r.a1 - x[0], 0.0, x[0] - r.b1});
  const double dy = std::max({r.a2 - x[1], 0.0, x[1] - r.b2});
  return std::hypot(dx, dy);
}

}  // namespace sticky_dbm
