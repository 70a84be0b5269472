// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/dirichlet_form.hpp"
#include "sticky_dbm/measure.hpp"
#include "sticky_dbm/test_function.hpp"

using namespace sticky_dbm;

namespace {

const StickyStructure kAtom = StickyStructure::points({{0.0, 1.0}});
const StickyStructure kSquare = StickyStructure::rectangle({-1.0, 1.0, -1.0, 1.0}, 1.0);

GridSpec grid(int dim, double h, double L) { return {h, TruncationBox::cube(dim, L)}; }

std::size_t node_at(const JumpChain& c, const Point& x) { return *c.grid()->nearest(x); }

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

Errc error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::internal_consistency;
}

}  // namespace

TEST(BuildChain, OneDimensionalExample) {
  const JumpChain c = build_chain(Density::constant(1), kAtom, grid(1, 0.1, 5.0));
  ASSERT_EQ(c.size(), 101u);
  const std::size_t s = node_at(c, point1(0.0));
  EXPECT_TRUE(c.is_sticky(s));
  EXPECT_EQ(c.coordinate(s)[0], 0.0);
  EXPECT_NEAR(c.pi(s), 1.1, 1e-14);
  const std::size_t i = node_at(c, point1(2.0));
  EXPECT_EQ(c.tag(i), StateTag::interior);
  EXPECT_NEAR(c.pi(i), 0.1, 1e-15);
  EXPECT_NEAR(c.rate(i, i + 1), 100.0, 1e-10);
  EXPECT_NEAR(c.rate(i, i - 1), 100.0, 1e-10);
  EXPECT_NEAR(c.rate(s, s + 1), 10.0 / 1.1, 1e-12);
  EXPECT_NEAR(c.rate(s, s - 1), 10.0 / 1.1, 1e-12);
  EXPECT_NEAR(c.rate(s + 1, s), 100.0, 1e-10);
  EXPECT_EQ(c.tag(0), StateTag::reflecting);
  EXPECT_EQ(c.tag(c.size() - 1), StateTag::reflecting);
  EXPECT_EQ(c.transitions(0).size(), 1u);
}

TEST(BuildChain, GeneratorOfSquareIsTwoAtInteriorNodes) {
  const JumpChain c = build_chain(Density::constant(1), kAtom, grid(1, 0.1, 5.0));
  const auto f = restrict_to_states(c, [](const Point& x) { return x[0] * x[0]; });
  const auto q = discrete_generator_apply(c, f);
  for (double x : {-3.0, -0.5, 0.3, 4.0}) EXPECT_NEAR(q[node_at(c, point1(x))], 2.0, 1e-9) << x;
}

TEST(BuildChain, GridCoordinatesAreExactMultiples) {
  const JumpChain c = build_chain(Density::gaussian(2), kSquare, grid(2, 0.05, 2.0));
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point x = c.coordinate(i);
    for (int a = 0; a < 2; ++a) EXPECT_EQ(x[a], std::round(x[a] / 0.05) * 0.05);
    EXPECT_EQ(c.is_sticky(i), kSquare.on_boundary(x)) << x[0] << ',' << x[1];
  }
}

TEST(BuildChain, TwoDimensionalWeights) {
  const double h = 0.1, w = 0.7;
  const auto s = StickyStructure::rectangle({-1.0, 1.0, -1.0, 1.0}, w);
  const JumpChain c = build_chain(Density::gaussian(2), s, grid(2, h, 3.0));
  for (const Point& x : {Point{1.0, 0.3}, Point{-1.0, -1.0}, Point{0.2, 1.0}}) {
    const std::size_t k = node_at(c, x);
    ASSERT_TRUE(c.is_sticky(k));
    EXPECT_NEAR(c.pi(k), std::exp(-(x[0] * x[0] + x[1] * x[1])) * (w * h + h * h), 1e-15);
  }
  const std::size_t k = node_at(c, {0.0, 0.0});
  EXPECT_EQ(c.tag(k), StateTag::interior);
  EXPECT_NEAR(c.pi(k), h * h, 1e-16);
  // Conductance rho(mid) h^0 in 2D.
  EXPECT_NEAR(c.rate(k, k + 1), std::exp(-0.0025) / (h * h), 1e-9);
  EXPECT_EQ(summarize(c).sticky, 80u);
}

TEST(BuildChain, StructuralInvariants) {
  for (int d : {1, 2}) {
    const StickyStructure& s = d == 1 ? kAtom : kSquare;
    const JumpChain c = build_chain(Density::gaussian(d), s, grid(d, d == 1 ? 0.02 : 0.1, 4.0));
    const auto diag = c.diagnostics();
    EXPECT_LE(diag.max_reversibility_error, 1e-13);
    EXPECT_LE(diag.max_row_sum, 1e-12);
    EXPECT_TRUE(diag.all_rates_valid);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_GT(c.exit_rate(i), 0.0);
  }
}

TEST(BuildChain, PiIsStationary) {
  for (int d : {1, 2}) {
    const StickyStructure& s = d == 1 ? kAtom : kSquare;
    const JumpChain c = build_chain(Density::gaussian(d), s, grid(d, 0.1, 3.0));
    const auto f = random_vector(c.size(), 5 + d);
    const auto q = discrete_generator_apply(c, f);
    const std::vector<double> one(c.size(), 1.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) scale += std::abs(q[i]) * c.pi(i);
    EXPECT_LE(std::abs(pi_inner(c, q, one)), 1e-12 * scale);
  }
}

TEST(BuildChain, SummationByParts) {
  for (int d : {1, 2}) {
    const StickyStructure& s = d == 1 ? kAtom : kSquare;
    const JumpChain c = build_chain(Density::gaussian(d), s, grid(d, 0.1, 3.0));
    const auto f = random_vector(c.size(), 17), g = random_vector(c.size(), 18);
    const auto qf = discrete_generator_apply(c, f);
    const double e = discrete_energy(c, f, g);
    EXPECT_NEAR(-pi_inner(c, qf, g), e, 1e-9 * (1.0 + std::abs(e)));
    EXPECT_NEAR(discrete_energy(c, g, f), e, 1e-9 * (1.0 + std::abs(e)));
    EXPECT_GE(discrete_energy(c, f, f), 0.0);
  }
}

TEST(BuildChain, DiscreteEnergyConvergesToTheForm) {
  const TestFunction f = catalog::abs_poly();
  const Density rho = Density::gaussian(1);
  const double E = energy_form(f, f, rho, kAtom);
  double prev_err = 1.0;
  for (double h : {0.04, 0.02, 0.01}) {
    const JumpChain c = build_chain(rho, kAtom, grid(1, h, 3.0));
    const auto v = restrict_to_states(c, [&](const Point& x) { return f.value(x); });
    const double err = std::abs(discrete_energy(c, v, v) - E);
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-3);
}

TEST(BuildChain, StickyGeneratorApproximatesJumpOverWeight) {
  const TestFunction f = catalog::abs_poly();
  const double h = 0.01;
  const JumpChain c = build_chain(Density::constant(1), kAtom, grid(1, h, 3.0));
  const auto v = restrict_to_states(c, [&](const Point& x) { return f.value(x); });
  const auto q = discrete_generator_apply(c, v);
  EXPECT_NEAR(q[node_at(c, point1(0.0))], 2.0, 4.0 * h);
}

TEST(BuildChain, StickyRatioApproachesContinuum) {
  const Density rho = Density::gaussian(1);
  const double target = 1.0 / (std::sqrt(M_PI) * std::erf(6.0) + 1.0);
  const JumpChain c = build_chain(rho, kAtom, grid(1, 0.02, 6.0));
  EXPECT_NEAR(c.sticky_ratio(), target, 0.01);
  EXPECT_NEAR(c.pi_total(), rho_mu_mass(rho, kAtom, TruncationBox::cube(1, 6.0)), 0.05);
}

TEST(BuildChain, ZeroWeightAtomIsOrdinary) {
  const auto flat = StickyStructure::points({{0.0, 0.0}});
  const JumpChain c = build_chain(Density::constant(1), flat, grid(1, 0.1, 2.0));
  const std::size_t s = node_at(c, point1(0.0));
  EXPECT_NEAR(c.pi(s), 0.1, 1e-15);
  EXPECT_NEAR(c.exit_rate(s), 200.0, 1e-9);
}

TEST(ValidateGrid, RejectsBadGrids) {
  const Density rho = Density::gaussian(1);
  EXPECT_EQ(error_code([&] { build_chain(rho, kAtom, grid(1, 0.3, 1.0)); }), Errc::configuration);
  EXPECT_EQ(error_code([&] { build_chain(rho, StickyStructure::points({{0.05, 1.0}}), grid(1, 0.1, 2.0)); }),
            Errc::configuration);
  EXPECT_EQ(error_code([&] { build_chain(rho, StickyStructure::points({{1.9, 1.0}}), grid(1, 0.1, 2.0)); }),
            Errc::configuration);
  EXPECT_EQ(error_code([&] {
              build_chain(rho, StickyStructure::points({{0.0, 1.0}, {0.2, 1.0}}), grid(1, 0.1, 2.0));
            }),
            Errc::configuration);
  EXPECT_EQ(error_code([&] { build_chain(rho, kAtom, grid(1, -0.1, 2.0)); }), Errc::configuration);
  EXPECT_EQ(error_code([&] { build_chain(Density::gaussian(2), kAtom, grid(2, 0.1, 2.0)); }), Errc::configuration);
  EXPECT_EQ(error_code([&] { build_chain(Density::gaussian(2), kSquare, grid(2, 0.1, 1.1)); }), Errc::configuration);
}

TEST(JumpChainCtor, RejectsBrokenInputs) {
  EXPECT_EQ(error_code([] {
              JumpChain(1, {point1(0.0), point1(1.0)}, {StateTag::interior, StateTag::interior}, {1.0, -1.0},
                        {{0, 1, 1.0}});
            }),
            Errc::internal_consistency);
  EXPECT_EQ(error_code([] {
              JumpChain(1, {point1(0.0), point1(1.0)}, {StateTag::interior, StateTag::interior}, {1.0, 1.0},
                        {{0, 5, 1.0}});
            }),
            Errc::contract_violation);
}

TEST(GridGeometry, NearestRoundTrips) {
  const JumpChain c = build_chain(Density::gaussian(2), kSquare, grid(2, 0.1, 2.0));
  for (std::size_t i = 0; i < c.size(); i += 7) EXPECT_EQ(node_at(c, c.coordinate(i)), i);
  EXPECT_FALSE(c.grid()->nearest({2.2, 0.0}).has_value());
}
