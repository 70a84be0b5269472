// SPDX-License-Identifier: Apache-2.0
//
// Compactly supported test functions that are continuous everywhere, C^2 off
// the sticky set A, and may have a derivative jump across A.
//
// Catalog entries have the form f = sigma * u with u smooth and sigma
// piecewise constant, jumping only across A where u vanishes. That keeps f
// continuous while producing a kink on A with exactly known one-sided
// derivatives.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"

namespace sticky_dbm {

/// Value, gradient and Laplacian of a smooth function at one point.
struct Jet {
  double value = 0.0;
  Point grad{0.0, 0.0};
  double lap = 0.0;
};

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.value = a.value * b.value;
  r.grad = {a.value * b.grad[0] + b.value * a.grad[0], a.value * b.grad[1] + b.value * a.grad[1]};
  r.lap = a.value * b.lap + b.value * a.lap + 2.0 * (a.grad[0] * b.grad[0] + a.grad[1] * b.grad[1]);
  return r;
}

/// Derivatives along a unit direction n, as limits from the +n side and the
/// -n side of a point on A. In 1D with n = +1 this is (f'_r, f'_l); in 2D
/// with n the outward normal of U it is (d_n f from outside, from inside).
struct OneSided {
  double plus = 0.0;
  double minus = 0.0;
  double jump() const { return plus - minus; }
};

namespace jets {

/// s^a (1 - s^2)^m scaled to x: u(x) = (x - c)^a (1 - ((x - c)/R)^2)^m on
/// |x - c| < R, zero outside. a in {0, 1}, m >= 2.
inline Jet poly_profile(double x, double c, double R, int a, int m) {
  const double s = (x - c) / R;
  if (std::abs(s) >= 1.0) return {};
  const double q = 1.0 - s * s;
  const double qm2 = std::pow(q, m - 2), qm1 = qm2 * q, qm = qm1 * q;
  double g, g1, g2;
  if (a == 0) {
    g = qm;
    g1 = -2.0 * m * s * qm1;
    g2 = -2.0 * m * qm1 + 4.0 * m * (m - 1) * s * s * qm2;
  } else {
    g = s * qm;
    g1 = qm - 2.0 * m * s * s * qm1;
    g2 = -6.0 * m * s * qm1 + 4.0 * m * (m - 1) * s * s * s * qm2;
  }
  const double Ra = a == 0 ? 1.0 : R;
  Jet j;
  j.value = Ra * g;
  j.grad = {Ra * g1 / R, 0.0};
  j.lap = Ra * g2 / (R * R);
  return j;
}

/// (1 - |x - c|^2 / R^2)^4 inside the disc, zero outside. C^3 across the circle.
inline Jet radial_cutoff(const Point& x, const Point& c, double R) {
  const double dx = x[0] - c[0], dy = x[1] - c[1];
  const double t = (dx * dx + dy * dy) / (R * R);
  if (t >= 1.0) return {};
  const double q = 1.0 - t;
  Jet j;
  j.value = q * q * q * q;
  j.grad = {-8.0 * q * q * q * dx / (R * R), -8.0 * q * q * q * dy / (R * R)};
  j.lap = 16.0 * q * q * (4.0 * t - 1.0) / (R * R);
  return j;
}

/// (x - a1)(b1 - x)(y - a2)(b2 - y): vanishes exactly on the lines through dU.
inline Jet rectangle_polynomial(const Point& p, const StickyRectangle& r) {
  const double X = (p[0] - r.a1) * (r.b1 - p[0]), Xp = r.a1 + r.b1 - 2.0 * p[0];
  const double Y = (p[1] - r.a2) * (r.b2 - p[1]), Yp = r.a2 + r.b2 - 2.0 * p[1];
  Jet j;
  j.value = X * Y;
  j.grad = {Xp * Y, X * Yp};
  j.lap = -2.0 * (X + Y);
  return j;
}

inline Jet affine(const Point& p, double c0, double cx, double cy) {
  Jet j;
  j.value = c0 + cx * p[0] + cy * p[1];
  j.grad = {cx, cy};
  return j;
}

}  // namespace jets

/// Piecewise-constant multiplier sigma. In 1D it jumps at a single kink
/// location; in 2D it takes one value inside U and another on the closed
/// complement.
struct SideFactor {
  enum class Kind { none, kink_1d, rectangle_2d };
  Kind kind = Kind::none;
  double kink = 0.0;
  StickyRectangle rect{};
  double minus = 1.0;  // left of the kink, or inside U
  double plus = 1.0;   // right of the kink, or outside U

  double at(const Point& x) const {
    switch (kind) {
      case Kind::none: return 1.0;
      case Kind::kink_1d: return x[0] < kink ? minus : plus;
      case Kind::rectangle_2d: {
        const bool in = x[0] > rect.a1 && x[0] < rect.b1 && x[1] > rect.a2 && x[1] < rect.b2;
        return in ? minus : plus;
      }
    }
    return 1.0;
  }

  /// Multipliers on the +n and -n sides of a point x on A.
  std::pair<double, double> sides(const Point& x, const Point& n) const {
    switch (kind) {
      case Kind::none: return {1.0, 1.0};
      case Kind::kink_1d:
        if (x[0] != kink) return {at(x), at(x)};
        return n[0] > 0.0 ? std::pair{plus, minus} : std::pair{minus, plus};
      case Kind::rectangle_2d: return {plus, minus};
    }
    return {1.0, 1.0};
  }
};

class TestFunction {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradientFn = std::function<Point(const Point&)>;
  using OneSidedFn = std::function<OneSided(const Point&, const Point&)>;

  /// Fully general form. `one_sided` may be empty, in which case generator
  /// evaluation on A is refused.
  TestFunction(std::string name, int dim, ValueFn value, GradientFn gradient, ValueFn laplacian, OneSidedFn one_sided,
               Box support, std::vector<double> breaks_x = {}, std::vector<double> breaks_y = {})
      : name_(std::move(name)),
        dim_(dim),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        laplacian_(std::move(laplacian)),
        one_sided_(std::move(one_sided)),
        support_(support),
        breaks_x_(std::move(breaks_x)),
        breaks_y_(std::move(breaks_y)) {
    require(dim == 1 || dim == 2, Errc::contract_violation, "test function dimension must be 1 or 2");
    require(support.dim == dim, Errc::contract_violation, "support box dimension mismatch");
    breaks_x_.push_back(support.lo[0]);
    breaks_x_.push_back(support.hi[0]);
    if (dim > 1) {
      breaks_y_.push_back(support.lo[1]);
      breaks_y_.push_back(support.hi[1]);
    }
  }

  /// f = sigma * u.
  static TestFunction piecewise(std::string name, int dim, std::function<Jet(const Point&)> smooth, SideFactor sigma,
                                Box support, std::vector<double> breaks_x = {}, std::vector<double> breaks_y = {}) {
    auto u = std::make_shared<std::function<Jet(const Point&)>>(std::move(smooth));
    return TestFunction(
        std::move(name), dim, [u, sigma](const Point& x) { return sigma.at(x) * (*u)(x).value; },
        [u, sigma](const Point& x) {
          const double s = sigma.at(x);
          const Jet j = (*u)(x);
          return Point{s * j.grad[0], s * j.grad[1]};
        },
        [u, sigma](const Point& x) { return sigma.at(x) * (*u)(x).lap; },
        [u, sigma](const Point& x, const Point& n) {
          const auto [sp, sm] = sigma.sides(x, n);
          const Jet j = (*u)(x);
          const double d = j.grad[0] * n[0] + j.grad[1] * n[1];
          return OneSided{sp * d, sm * d};
        },
        support, std::move(breaks_x), std::move(breaks_y));
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double value(const Point& x) const { return value_(x); }
  double operator()(const Point& x) const { return value_(x); }
  /// Gradient off A.
  Point gradient(const Point& x) const { return gradient_(x); }
  /// Laplacian off A.
  double laplacian(const Point& x) const { return laplacian_(x); }
  bool has_one_sided_data() const { return static_cast<bool>(one_sided_); }

  OneSided one_sided(const Point& x, const Point& n) const {
    if (!one_sided_) fail(Errc::contract_violation, "test function " + name_ + " carries no one-sided data on A");
    return one_sided_(x, n);
  }

  const Box& support() const { return support_; }
  double support_radius() const {
    double r = 0.0;
    for (int i = 0; i < dim_; ++i) r = std::max({r, std::abs(support_.lo[i]), std::abs(support_.hi[i])});
    return r;
  }
  const std::vector<double>& breaks_x() const { return breaks_x_; }
  const std::vector<double>& breaks_y() const { return breaks_y_; }

 private:
  std::string name_;
  int dim_;
  ValueFn value_;
  GradientFn gradient_;
  ValueFn laplacian_;
  OneSidedFn one_sided_;
  Box support_;
  std::vector<double> breaks_x_;
  std::vector<double> breaks_y_;
};

/// Largest deviations found when checking the TestFunction invariants.
struct TestFunctionCheck {
  double continuity = 0.0;       // |f(x + d n) - f(x - d n)| across A
  double one_sided = 0.0;        // relative error of one-sided data vs FD
  double outside_support = 0.0;  // max |f|, |grad f|, |lap f| outside support
};

/// Probes `probes` random points on every sticky component.
inline TestFunctionCheck check_test_function(const TestFunction& f, const StickyStructure& sticky, int probes = 20,
                                             std::uint64_t seed = 7) {
  TestFunctionCheck c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double eps = 1e-5, tiny = 1e-11;
  auto probe = [&](const Point& x, const Point& n) {
    auto shifted = [&](double t) { return f.value({x[0] + t * n[0], x[1] + t * n[1]}); };
    c.continuity = std::max(c.continuity, std::abs(shifted(tiny) - shifted(-tiny)));
    if (!f.has_one_sided_data()) return;
    const OneSided os = f.one_sided(x, n);
    // Second-order one-sided differences; the kink is at t = 0.
    const double fd_plus = (-3.0 * shifted(0.0) + 4.0 * shifted(eps) - shifted(2 * eps)) / (2 * eps);
    const double fd_minus = (3.0 * shifted(0.0) - 4.0 * shifted(-eps) + shifted(-2 * eps)) / (2 * eps);
    c.one_sided = std::max(c.one_sided, std::abs(fd_plus - os.plus) / std::max(1.0, std::abs(os.plus)));
    c.one_sided = std::max(c.one_sided, std::abs(fd_minus - os.minus) / std::max(1.0, std::abs(os.minus)));
  };
  if (sticky.is_points()) {
    for (const auto& p : sticky.sticky_points())
      for (int i = 0; i < probes; ++i) probe(point1(p.x), {i % 2 == 0 ? 1.0 : -1.0, 0.0});
  } else {
    const auto& r = sticky.rect();
    for (int i = 0; i < probes; ++i) {
      const double s = 0.02 + 0.96 * unit(rng);
      probe({r.a1 + s * (r.b1 - r.a1), r.a2}, {0.0, -1.0});
      probe({r.a1 + s * (r.b1 - r.a1), r.b2}, {0.0, 1.0});
      probe({r.a1, r.a2 + s * (r.b2 - r.a2)}, {-1.0, 0.0});
      probe({r.b1, r.a2 + s * (r.b2 - r.a2)}, {1.0, 0.0});
    }
  }
  const Box& sup = f.support();
  for (int i = 0; i < 4 * probes; ++i) {
    Point x{0.0, 0.0};
    for (int k = 0; k < f.dim(); ++k) {
      const double span = sup.hi[k] - sup.lo[k];
      x[k] = unit(rng) < 0.5 ? sup.lo[k] - (0.01 + unit(rng)) * span : sup.hi[k] + (0.01 + unit(rng)) * span;
    }
    const Point g = f.gradient(x);
    c.outside_support =
        std::max({c.outside_support, std::abs(f.value(x)), norm(g, f.dim()), std::abs(f.laplacian(x))});
  }
  return c;
}

/// Shipped test functions. 1D entries kink at the first sticky point (or at
/// 0 when A is empty); 2D entries kink on dU.
namespace catalog {

inline double kink_location(const StickyStructure& sticky) {
  return sticky.sticky_points().empty() ? 0.0 : sticky.sticky_points().front().x;
}

/// |x - x0| (1 - (x - x0)^2)^2 on [x0 - 1, x0 + 1].
inline TestFunction abs_poly(double x0 = 0.0) {
  SideFactor s{SideFactor::Kind::kink_1d, x0, {}, -1.0, 1.0};
  return TestFunction::piecewise(
      "abs_poly", 1, [x0](const Point& x) { return jets::poly_profile(x[0], x0, 1.0, 1, 2); }, s,
      Box::interval(x0 - 1.0, x0 + 1.0), {x0});
}

/// (x - x0)(1 - (x - x0)^2)^3 scaled by 1/2 left and 3/2 right of x0.
inline TestFunction asym_kink(double x0 = 0.0) {
  SideFactor s{SideFactor::Kind::kink_1d, x0, {}, 0.5, 1.5};
  return TestFunction::piecewise(
      "asym_kink", 1, [x0](const Point& x) { return jets::poly_profile(x[0], x0, 1.0, 1, 3); }, s,
      Box::interval(x0 - 1.0, x0 + 1.0), {x0});
}

/// (x - x0)(1 - (x - x0)^2)^3, C^2 everywhere.
inline TestFunction odd_poly(double x0 = 0.0) {
  return TestFunction::piecewise(
      "odd_poly", 1, [x0](const Point& x) { return jets::poly_profile(x[0], x0, 1.0, 1, 3); }, SideFactor{},
      Box::interval(x0 - 1.0, x0 + 1.0));
}

/// (1 - ((x - c)/R)^2)^4.
inline TestFunction bump(double c, double R, std::string name = "bump") {
  return TestFunction::piecewise(
      std::move(name), 1, [c, R](const Point& x) { return jets::poly_profile(x[0], c, R, 0, 4); }, SideFactor{},
      Box::interval(c - R, c + R));
}

inline TestFunction zero_1d() {
  return TestFunction(
      "zero", 1, [](const Point&) { return 0.0; }, [](const Point&) { return Point{0.0, 0.0}; },
      [](const Point&) { return 0.0; }, [](const Point&, const Point&) { return OneSided{}; },
      Box::interval(-1.0, 1.0));
}

/// Cutoff radius used by the 2D entries: 1.5 times the circumradius of U.
inline double cutoff_radius(const StickyRectangle& r) { return 0.75 * std::hypot(r.b1 - r.a1, r.b2 - r.a2); }

inline Point rect_center(const StickyRectangle& r) { return {0.5 * (r.a1 + r.b1), 0.5 * (r.a2 + r.b2)}; }

inline Box disc_box(const Point& c, double R) { return Box::rect(c[0] - R, c[0] + R, c[1] - R, c[1] + R); }

/// Rectangle polynomial times a radial cutoff, scaled by `inside` in U and
/// `outside` on the complement.
inline TestFunction tent(const StickyRectangle& r, double inside = 1.0, double outside = -0.5,
                         std::string name = "tent") {
  const Point c = rect_center(r);
  const double R = cutoff_radius(r);
  SideFactor s{SideFactor::Kind::rectangle_2d, 0.0, r, inside, outside};
  return TestFunction::piecewise(
      std::move(name), 2,
      [r, c, R](const Point& x) { return jets::rectangle_polynomial(x, r) * jets::radial_cutoff(x, c, R); }, s,
      disc_box(c, R), {r.a1, r.b1}, {r.a2, r.b2});
}

inline TestFunction tilted_tent(const StickyRectangle& r) {
  const Point c = rect_center(r);
  const double R = cutoff_radius(r);
  SideFactor s{SideFactor::Kind::rectangle_2d, 0.0, r, 1.0, 2.0};
  return TestFunction::piecewise(
      "tilted_tent", 2,
      [r, c, R](const Point& x) {
        return jets::rectangle_polynomial(x, r) * jets::affine(x, 1.0, 0.3, -0.2) * jets::radial_cutoff(x, c, R);
      },
      s, disc_box(c, R), {r.a1, r.b1}, {r.a2, r.b2});
}

inline TestFunction bump_2d(const Point& c, double R, std::string name = "bump") {
  return TestFunction::piecewise(
      std::move(name), 2, [c, R](const Point& x) { return jets::radial_cutoff(x, c, R); }, SideFactor{},
      disc_box(c, R));
}

inline TestFunction zero_2d() {
  return TestFunction(
      "zero", 2, [](const Point&) { return 0.0; }, [](const Point&) { return Point{0.0, 0.0}; },
      [](const Point&) { return 0.0; }, [](const Point&, const Point&) { return OneSided{}; },
      Box::rect(-1.0, 1.0, -1.0, 1.0));
}

inline std::vector<std::string> ids(int dim) {
  if (dim == 1) return {"abs_poly", "asym_kink", "odd_poly", "bump", "wide_bump"};
  return {"tent", "tent_inside", "tilted_tent", "bump", "shifted_bump"};
}

/// Looks up a catalog entry by id for the given sticky structure.
inline std::optional<TestFunction> find(const std::string& id, const StickyStructure& sticky) {
  if (sticky.is_points()) {
    const double x0 = kink_location(sticky);
    if (id == "abs_poly") return abs_poly(x0);
    if (id == "asym_kink") return asym_kink(x0);
    if (id == "odd_poly") return odd_poly(x0);
    if (id == "bump") return bump(x0 + 0.3, 0.9, "bump");
    if (id == "wide_bump") return bump(x0, 1.5, "wide_bump");
    if (id == "zero") return zero_1d();
    return std::nullopt;
  }
  const auto& r = sticky.rect();
  const Point c = rect_center(r);
  const double R = cutoff_radius(r);
  if (id == "tent") return tent(r);
  if (id == "tent_inside") return tent(r, 1.0, 0.0, "tent_inside");
  if (id == "tilted_tent") return tilted_tent(r);
  if (id == "bump") return bump_2d(c, R, "bump");
  if (id == "shifted_bump")
    return bump_2d({c[0] + 0.2 * (r.b1 - r.a1), c[1] - 0.15 * (r.b2 - r.a2)}, 0.75 * R, "shifted_bump");
  if (id == "zero") return zero_2d();
  return std::nullopt;
}

/// Pairs (f, g) exercised by the generator symmetry check.
inline std::vector<std::pair<std::string, std::string>> symmetry_pairs(int dim) {
  if (dim == 1)
    return {{"abs_poly", "bump"},     {"asym_kink", "wide_bump"}, {"abs_poly", "asym_kink"},
            {"odd_poly", "abs_poly"}, {"asym_kink", "asym_kink"}, {"bump", "odd_poly"}};
  return {{"tent", "bump"},        {"tent_inside", "shifted_bump"}, {"tilted_tent", "tent"},
          {"tent", "tent"},        {"bump", "tilted_tent"}};
}

}  // namespace catalog
}  // namespace sticky_dbm
