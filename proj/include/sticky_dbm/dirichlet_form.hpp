// SPDX-License-Identifier: Apache-2.0
//
// The bilinear form E(f, g) = sum_i int d_i f d_i g rho dx on L^2(rho mu)
// and its generator
//
//   L f = Laplacian f + <grad f, grad ln rho>            off A,
//   L f = (jump of the normal derivative across A) / w    on A,
//
// where the jump is f'_r - f'_l at an atom (1D) or d_n f outside minus d_n f
// inside U along the outward normal (2D). The generator carries the full
// Laplacian, matching a driving noise of sqrt(2) dB.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"
#include "sticky_dbm/measure.hpp"
#include "sticky_dbm/quadrature.hpp"
#include "sticky_dbm/test_function.hpp"

namespace sticky_dbm {

namespace detail {

inline std::vector<double> merged(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline void check_dims(const TestFunction& f, const Density& density, const StickyStructure& sticky) {
  require(f.dim() == density.dim() && f.dim() == sticky.dim(), Errc::contract_violation,
          "test function, density and sticky set dimensions differ");
}

}  // namespace detail

/// Generator of a test function split into its two rho mu-versions.
struct GeneratorValue {
  std::function<double(const Point&)> off_A_part;
  std::function<double(const Point&)> on_A_part;
  /// Numerator of on_A_part, i.e. the derivative jump before division by the
  /// local weight. Defined even where the weight is zero.
  std::function<double(const Point&)> on_A_jump;
};

inline double energy_form(const TestFunction& f, const TestFunction& g, const Density& density,
                          const StickyStructure& sticky, const QuadratureOptions& opt = {}) {
  detail::check_dims(f, density, sticky);
  require(g.dim() == f.dim(), Errc::contract_violation, "test function dimensions differ");
  const Box region = f.support().intersect(g.support());
  const int d = f.dim();
  return lebesgue_integral(
      density, sticky, [&](const Point& x) { return dot(f.gradient(x), g.gradient(x), d); }, region,
      detail::merged(f.breaks_x(), g.breaks_x()), detail::merged(f.breaks_y(), g.breaks_y()), opt);
}

/// Derivative jump of f across A at a point of A. At a rectangle corner the
/// two incident edges are averaged.
inline double generator_jump(const TestFunction& f, const StickyStructure& sticky, const Point& x) {
  if (sticky.is_points()) {
    if (!sticky.atom_at(x[0])) fail(Errc::contract_violation, "point is not a sticky atom");
    return f.one_sided(point1(x[0]), {1.0, 0.0}).jump();
  }
  const auto normals = sticky.outward_normals(x);
  if (normals.empty()) fail(Errc::contract_violation, "point is not on the sticky boundary");
  double s = 0.0;
  for (const auto& n : normals) s += f.one_sided(x, n).jump();
  return s / static_cast<double>(normals.size());
}

inline double sticky_weight_at(const StickyStructure& sticky, const Point& x) {
  if (sticky.is_points()) {
    const auto k = sticky.atom_at(x[0]);
    if (!k) fail(Errc::contract_violation, "point is not a sticky atom");
    return sticky.sticky_points()[*k].weight;
  }
  return sticky.w_surf();
}

inline GeneratorValue apply_generator(const TestFunction& f, const Density& density, const StickyStructure& sticky) {
  detail::check_dims(f, density, sticky);
  if (!f.has_one_sided_data())
    fail(Errc::contract_violation, "test function " + f.name() + " has no one-sided data on A");
  const int d = f.dim();
  GeneratorValue L;
  L.off_A_part = [f, density, d](const Point& x) {
    return f.laplacian(x) + dot(f.gradient(x), density.log_gradient(x), d);
  };
  L.on_A_jump = [f, sticky](const Point& x) { return generator_jump(f, sticky, x); };
  L.on_A_part = [f, sticky](const Point& x) {
    const double w = sticky_weight_at(sticky, x);
    if (w == 0.0) fail(Errc::contract_violation, "generator on A is undefined where the sticky weight is zero");
    return generator_jump(f, sticky, x) / w;
  };
  return L;
}

/// Both sides of E(f, g) = <-L f, g> in L^2(rho mu).
struct SymmetryTerms {
  double energy = 0.0;
  double pairing = 0.0;  // <-L f, g>
  double residual() const { return std::abs(pairing - energy); }
};

inline SymmetryTerms symmetry_terms(const TestFunction& f, const TestFunction& g, const Density& density,
                                    const StickyStructure& sticky, const QuadratureOptions& opt = {}) {
  const GeneratorValue L = apply_generator(f, density, sticky);
  const Box region = f.support().intersect(g.support());
  SymmetryTerms t;
  t.energy = energy_form(f, g, density, sticky, opt);
  const double bulk = lebesgue_integral(
      density, sticky, [&](const Point& x) { return L.off_A_part(x) * g.value(x); }, region,
      detail::merged(f.breaks_x(), g.breaks_x()), detail::merged(f.breaks_y(), g.breaks_y()), opt);
  // S carries the weight, so w * (jump / w) leaves the jump; zero-weight
  // components carry no S-mass and drop out.
  const double surface = sticky_integral(
      density, sticky,
      [&](const Point& x) {
        const double w = sticky_weight_at(sticky, x);
        return w == 0.0 ? 0.0 : L.on_A_part(x) * g.value(x);
      },
      region, opt);
  t.pairing = -(bulk + surface);
  return t;
}

inline double symmetry_residual(const TestFunction& f, const TestFunction& g, const Density& density,
                                const StickyStructure& sticky, const QuadratureOptions& opt = {}) {
  return symmetry_terms(f, g, density, sticky, opt).residual();
}

/// Lebesgue density of the energy measure: 2 |grad f|^2 rho off A, 0 on A.
inline std::function<double(const Point&)> energy_measure_density(const TestFunction& f, const Density& density,
                                                                  const StickyStructure& sticky) {
  detail::check_dims(f, density, sticky);
  const int d = f.dim();
  return [f, density, sticky, d](const Point& x) {
    if (sticky.contains(x)) return 0.0;
    const Point g = f.gradient(x);
    return 2.0 * dot(g, g, d) * density.value(x);
  };
}

/// Density of the same measure with respect to rho mu: 2 |grad f|^2 off A.
/// This is the rate of the square bracket of the martingale part of f(X).
inline std::function<double(const Point&)> bracket_rate(const TestFunction& f, const StickyStructure& sticky) {
  const int d = f.dim();
  return [f, sticky, d](const Point& x) {
    if (sticky.contains(x)) return 0.0;
    const Point g = f.gradient(x);
    return 2.0 * dot(g, g, d);
  };
}

}  // namespace sticky_dbm
