// SPDX-License-Identifier: Apache-2.0
//
// The composite measure mu = Lebesgue + S and its rho-weighted version.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"
#include "sticky_dbm/quadrature.hpp"

namespace sticky_dbm {

using ScalarField = std::function<double(const Point&)>;

/// w_surf * integral over the part of dU inside `region` of integrand * rho dH^1.
inline double surface_quadrature(const Density& density, const StickyStructure& sticky, const ScalarField& integrand,
                                 const Box& region, const QuadratureOptions& opt = {}) {
  require(sticky.is_rectangle(), Errc::contract_violation, "surface quadrature needs a rectangle boundary");
  const auto& r = sticky.rect();
  const double w = sticky.w_surf();
  if (w == 0.0) return 0.0;
  auto along = [&](auto&& pt, double lo, double hi) {
    return integrate(
        [&](double s) {
          const Point x = pt(s);
          const double v = integrand(x);
          if (!std::isfinite(v)) fail(Errc::numerical_failure, "non-finite integrand on the sticky boundary");
          return v * density.value(x);
        },
        lo, hi, {}, opt);
  };
  double total = 0.0;
  // Horizontal edges y = a2 and y = b2.
  for (double y : {r.a2, r.b2}) {
    if (y < region.lo[1] || y > region.hi[1]) continue;
    const double lo = std::max(r.a1, region.lo[0]), hi = std::min(r.b1, region.hi[0]);
    if (hi > lo) total += along([y](double s) { return Point{s, y}; }, lo, hi);
  }
  // Vertical edges x = a1 and x = b1.
  for (double x : {r.a1, r.b1}) {
    if (x < region.lo[0] || x > region.hi[0]) continue;
    const double lo = std::max(r.a2, region.lo[1]), hi = std::min(r.b2, region.hi[1]);
    if (hi > lo) total += along([x](double s) { return Point{x, s}; }, lo, hi);
  }
  return w * total;
}

inline double surface_quadrature(const Density& density, const StickyStructure& sticky, const ScalarField& integrand,
                                 const QuadratureOptions& opt = {}) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Box everything = Box::rect(-kInf, kInf, -kInf, kInf);
  return surface_quadrature(density, sticky, integrand, everything, opt);
}

/// Sticky part only: sum_k w_k rho(x_k) f(x_k) over atoms in `region`
/// (1D), or the weighted surface integral (2D).
inline double sticky_integral(const Density& density, const StickyStructure& sticky, const ScalarField& f,
                              const Box& region, const QuadratureOptions& opt = {}) {
  if (sticky.is_rectangle()) return surface_quadrature(density, sticky, f, region, opt);
  double s = 0.0;
  for (const auto& p : sticky.sticky_points()) {
    const Point x = point1(p.x);
    if (!region.contains(x) || p.weight == 0.0) continue;
    const double v = f(x);
    if (!std::isfinite(v)) fail(Errc::numerical_failure, "non-finite integrand at a sticky point");
    s += p.weight * density.value(x) * v;
  }
  return s;
}

/// Lebesgue part only: integral of f rho over `region`, split at A and at
/// `extra_breaks`.
inline double lebesgue_integral(const Density& density, const StickyStructure& sticky, const ScalarField& f,
                                const Box& region, const std::vector<double>& extra_x = {},
                                const std::vector<double>& extra_y = {}, const QuadratureOptions& opt = {}) {
  if (region.degenerate()) return 0.0;
  auto bx = sticky.breaks(0);
  bx.insert(bx.end(), extra_x.begin(), extra_x.end());
  std::vector<double> by;
  if (region.dim > 1) {
    by = sticky.breaks(1);
    by.insert(by.end(), extra_y.begin(), extra_y.end());
  }
  return integrate_box([&](const Point& x) { return f(x) * density.value(x); }, region, bx, by, opt);
}

/// Integral of f with respect to rho mu over `region`.
inline double integrate_rho_mu(const Density& density, const StickyStructure& sticky, const ScalarField& f,
                               const Box& region, const QuadratureOptions& opt = {}) {
  require(density.dim() == region.dim && sticky.dim() == region.dim, Errc::contract_violation,
          "density, sticky set and region dimensions differ");
  const double total =
      lebesgue_integral(density, sticky, f, region, {}, {}, opt) + sticky_integral(density, sticky, f, region, opt);
  if (!std::isfinite(total)) fail(Errc::numerical_failure, "rho mu integral is not finite");
  return total;
}

/// rho mu(region).
inline double rho_mu_mass(const Density& density, const StickyStructure& sticky, const Box& region,
                          const QuadratureOptions& opt = {}) {
  return integrate_rho_mu(density, sticky, [](const Point&) { return 1.0; }, region, opt);
}

inline double rho_mu_mass(const Density& density, const StickyStructure& sticky, const TruncationBox& box,
                          const QuadratureOptions& opt = {}) {
  return rho_mu_mass(density, sticky, box.box(), opt);
}

}  // namespace sticky_dbm
