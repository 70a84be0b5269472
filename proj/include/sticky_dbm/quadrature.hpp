// SPDX-License-Identifier: Apache-2.0
//
// Adaptive composite Gauss-Legendre quadrature with forced split points.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"

namespace sticky_dbm {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 40;
};

namespace detail {

inline constexpr int kGaussOrder = 15;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

// Newton iteration on P_n, started from the Chebyshev-like guess.
inline GaussRule make_gauss_rule() {
  GaussRule rule;
  constexpr int n = kGaussOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

template <class F>
double gauss_panel(const F& f, double a, double b) {
  const auto& r = gauss_rule();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGaussOrder; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

template <class F>
double adaptive_panel(const F& f, double a, double b, double whole, double tol, int depth,
                      const QuadratureOptions& opt) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_panel(f, a, mid);
  const double right = gauss_panel(f, mid, b);
  const double refined = left + right;
  if (!std::isfinite(refined)) fail(Errc::numerical_failure, "non-finite integrand value in quadrature");
  if (std::abs(refined - whole) <= tol) return refined;
  if (depth >= opt.max_depth)
    fail(Errc::numerical_failure, "adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                                      std::to_string(b) + "]");
  return adaptive_panel(f, a, mid, left, 0.5 * tol, depth + 1, opt) +
         adaptive_panel(f, mid, b, right, 0.5 * tol, depth + 1, opt);
}

/// Sorted, deduplicated break points restricted to the open interval (a, b),
/// with a and b prepended/appended.
inline std::vector<double> split_points(double a, double b, const std::vector<double>& breaks) {
  std::vector<double> pts{a};
  std::vector<double> inner;
  for (double x : breaks)
    if (x > a && x < b) inner.push_back(x);
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  pts.insert(pts.end(), inner.begin(), inner.end());
  pts.push_back(b);
  return pts;
}

}  // namespace detail

/// Integral of f over [a, b], split at every break inside (a, b).
template <class F>
double integrate(const F& f, double a, double b, const std::vector<double>& breaks = {},
                 const QuadratureOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  const auto pts = detail::split_points(a, b, breaks);
  // A coarse first pass fixes the scale for the relative tolerance.
  std::vector<double> coarse(pts.size() - 1);
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    coarse[i] = detail::gauss_panel(f, pts[i], pts[i + 1]);
    scale += std::abs(coarse[i]);
  }
  if (!std::isfinite(scale)) fail(Errc::numerical_failure, "non-finite integrand value in quadrature");
  const double tol = std::max(opt.abs_tol, opt.rel_tol * scale);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double share = tol * (pts[i + 1] - pts[i]) / (b - a);
    total += detail::adaptive_panel(f, pts[i], pts[i + 1], coarse[i], share, 0, opt);
  }
  if (!std::isfinite(total)) fail(Errc::numerical_failure, "quadrature result is not finite");
  return total;
}

/// Integral of f over a 1D or 2D box. In 2D the rule is an iterated 1D rule;
/// `breaks_x` / `breaks_y` are forced splits along each axis.
template <class F>
double integrate_box(const F& f, const Box& box, const std::vector<double>& breaks_x,
                     const std::vector<double>& breaks_y = {}, const QuadratureOptions& opt = {}) {
  if (box.dim == 1) return integrate([&](double x) { return f(Point{x, 0.0}); }, box.lo[0], box.hi[0], breaks_x, opt);
  QuadratureOptions inner = opt;
  const double width = std::max(box.hi[0] - box.lo[0], 1e-300);
  inner.abs_tol = opt.abs_tol / (4.0 * width);
  inner.rel_tol = opt.rel_tol * 0.25;
  auto slice = [&](double x) {
    return integrate([&](double y) { return f(Point{x, y}); }, box.lo[1], box.hi[1], breaks_y, inner);
  };
  return integrate(slice, box.lo[0], box.hi[0], breaks_x, opt);
}

}  // namespace sticky_dbm
