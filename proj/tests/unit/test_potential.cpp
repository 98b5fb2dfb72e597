#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hlsflow/potential.hpp"
#include "oracles.hpp"

using namespace hlsflow;
using std::numbers::pi;

namespace {

RadialDensity unit_ball(int d, std::size_t n, double r_max) {
  auto g = make_grid(RadialGrid::uniform(d, n, r_max));
  std::vector<double> v(n, 0.0);
  const auto c = g->centers();
  for (std::size_t i = 0; i < n; ++i) v[i] = c[i] < 1.0 ? 1.0 : 0.0;
  return RadialDensity(g, std::move(v));
}

}  // namespace

TEST(NewtonianPotential, ZeroDensity) {
  const auto g = make_grid(RadialGrid::uniform(3, 16, 2.0));
  const auto u = newtonian_potential(RadialDensity::zero(g));
  for (double x : u.values()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(u.value_at(5.0), 0.0);
}

TEST(NewtonianPotential, UniformBallInteriorAndExterior) {
  const auto f = unit_ball(3, 1024, 2.0);
  const auto u = newtonian_potential(f);
  EXPECT_NEAR(u.value_at(0.0), 0.5, 1e-12);
  for (double r : {0.1, 0.5, 0.9}) EXPECT_NEAR(u.value_at(r), (3.0 - r * r) / 6.0, 1e-12);
  for (double r : {1.0, 1.5, 2.0, 3.0, 40.0}) EXPECT_NEAR(u.value_at(r) * 3.0 * r, 1.0, 1e-12);
}

TEST(NewtonianPotential, SlopeIsFluxIdentity) {
  const auto f = unit_ball(3, 256, 3.0);
  const auto u = newtonian_potential(f);
  const auto s = f.grid().surfaces();
  const auto m = u.enclosed_mass();
  for (std::size_t e = 1; e < s.size(); ++e) EXPECT_DOUBLE_EQ(u.slopes()[e], -m[e] / s[e]);
  EXPECT_NEAR(u.slope_at(2.0), -mass(f) / (4.0 * pi * 4.0), 1e-14);
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_GE(m[i], m[i - 1]);
  EXPECT_NEAR(m.back(), mass(f), 1e-13);
}

TEST(NewtonianPotential, NewtonTheoremOutsideSupport) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int d : {3, 4, 5}) {
    auto g = make_grid(RadialGrid::uniform(d, 200, 4.0));
    std::vector<double> v(200, 0.0);
    for (std::size_t i = 0; i < 100; ++i) v[i] = unif(rng);
    const RadialDensity f(g, v);
    const auto u = newtonian_potential(f);
    const double m = mass(f);
    const double sigma = sphere_surface_area(d);
    for (double r : {2.0, 2.5, 3.9, 4.0, 10.0}) {
      EXPECT_NEAR(u.value_at(r) / (m * std::pow(r, 2 - d) / ((d - 2) * sigma)), 1.0, 1e-10);
    }
    // Positive everywhere and decreasing outside the support.
    const auto vals = u.values();
    for (double x : vals) EXPECT_GT(x, 0.0);
    for (std::size_t i = 101; i < vals.size(); ++i) EXPECT_LT(vals[i], vals[i - 1]);
  }
}

TEST(NewtonianPotential, DiscreteLaplacianRecoversDensity) {
  // Sampled smooth profile: -Laplacian of the center values by the
  // conservative three-point stencil, compared in the interior.
  auto err_at = [](std::size_t n) {
    auto g = make_grid(RadialGrid::uniform(3, n, 8.0));
    const auto f = RadialDensity::cell_averages(g, [](double r) { return std::exp(-r * r); });
    const auto u = newtonian_potential(f);
    const auto c = g->centers();
    const auto s = g->surfaces();
    const auto v = g->volumes();
    const auto uv = u.values();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n && c[i] < 2.0; ++i) {
      if (c[i] < 0.5) continue;
      const double flux_hi = s[i + 1] * (uv[i + 1] - uv[i]) / (c[i + 1] - c[i]);
      const double flux_lo = s[i] * (uv[i] - uv[i - 1]) / (c[i] - c[i - 1]);
      const double lap = (flux_hi - flux_lo) / v[i];
      worst = std::max(worst, std::abs(-lap - f[i]));
    }
    return worst;
  };
  const double e1 = err_at(200);
  const double e2 = err_at(400);
  EXPECT_LT(e1, 1e-3);
  EXPECT_GT(std::log2(e1 / e2), 1.8);
}

TEST(DriftField, UniformBall) {
  const auto f = unit_ball(3, 512, 4.0);
  const auto field = drift_field(f, 1.0);
  const auto e = f.grid().edges();
  const std::size_t at2 = 256;
  ASSERT_DOUBLE_EQ(e[at2], 2.0);
  const double norm45 = std::pow(4.0 * pi / 3.0, 2.0 / 3.0);
  EXPECT_NEAR(field[at2], -(1.0 / 12.0) * 3.0 / norm45, 1e-13);
  EXPECT_EQ(field[0], 0.0);
  for (double x : field) EXPECT_LE(x, 0.0);
  const auto twice = drift_field(f, 2.0);
  for (std::size_t i = 0; i < field.size(); ++i) EXPECT_DOUBLE_EQ(twice[i], 2.0 * field[i]);
}

TEST(DriftField, ZeroWhereNoMassEnclosed) {
  auto g = make_grid(RadialGrid::uniform(3, 10, 1.0));
  std::vector<double> v(10, 0.0);
  v[6] = 1.0;
  const auto field = drift_field(RadialDensity(g, v), 0.7);
  for (std::size_t i = 0; i <= 6; ++i) EXPECT_EQ(field[i], 0.0);
  EXPECT_LT(field[7], 0.0);
  EXPECT_THROW(drift_field(RadialDensity::zero(g), 1.0), InvalidArgument);
}

TEST(CoulombEnergy, UniformBall) {
  EXPECT_EQ(coulomb_energy(RadialDensity::zero(make_grid(RadialGrid::uniform(3, 8, 1.0)))), 0.0);
  // sigma_2 int_0^1 (3 - s^2)/6 s^2 ds = 8 pi / 15, from the Simpson oracle.
  const double ref = 4.0 * pi * oracle::simpson([](double s) { return (3.0 - s * s) / 6.0 * s * s; }, 0.0, 1.0);
  EXPECT_NEAR(ref, 8.0 * pi / 15.0, 1e-13);
  EXPECT_NEAR(coulomb_energy(unit_ball(3, 333, 3.0 * 333.0 / 111.0)) / ref, 1.0, 1e-12);
}

TEST(CoulombEnergy, MatchesKernelDoubleSum) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int d : {3, 4}) {
    auto g = make_grid(RadialGrid::stretched(d, 256, 5.0, 3.0));
    std::vector<double> v(256);
    for (auto& x : v) x = unif(rng);
    const RadialDensity f(g, v);
    const std::vector<double> edges(g->edges().begin(), g->edges().end());
    const double ref = oracle::coulomb_double_sum(d, edges, v);
    EXPECT_NEAR(coulomb_energy(f) / ref, 1.0, 1e-8) << "d = " << d;
  }
}

TEST(CoulombEnergy, PositiveForRandomDensities) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto g = make_grid(RadialGrid::uniform(5, 50, 2.0));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(50, 0.0);
    v[static_cast<std::size_t>(unif(rng) * 50)] = unif(rng) + 1e-6;
    for (auto& x : v) {
      if (unif(rng) < 0.2) x = unif(rng);
    }
    EXPECT_GT(coulomb_energy(RadialDensity(g, v)), 0.0);
  }
}
