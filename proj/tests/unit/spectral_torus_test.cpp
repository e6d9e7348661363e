#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "cshv/error.hpp"
#include "cshv/spectral_torus.hpp"

using namespace cshv;
using std::numbers::pi;

namespace {

TorusLattice sheared(int n) { return TorusLattice({1.0, 0.0}, {0.3, 1.0}, n, n); }

// cos(k_mn . x) on the grid, with k_mn built by hand from the dual basis.
ScalarGrid plane_wave(const TorusLattice& lat, int m, int n) {
  const Vec2 k = static_cast<double>(m) * lat.dual1() + static_cast<double>(n) * lat.dual2();
  return ScalarGrid::from_function(lat, [k](Vec2 x) { return std::cos(dot(k, x)); });
}

}  // namespace

TEST(TorusLattice, RejectsBadGrids) {
  EXPECT_THROW(TorusLattice({1, 0}, {0, 1}, 15, 16), Error);
  EXPECT_THROW(TorusLattice({1, 0}, {0, 1}, 8, 8), Error);
  EXPECT_THROW(TorusLattice({1, 0}, {0, 1}, 22, 22), Error);  // factor 11
  EXPECT_THROW(TorusLattice({1, 0}, {2, 0}, 16, 16), Error);  // collinear
  EXPECT_NO_THROW(TorusLattice({1, 0}, {0, 1}, 30, 42));
}

TEST(TorusLattice, DualBasisOnShearedTorus) {
  const TorusLattice lat = sheared(32);
  const Vec2 t[2] = {lat.tau1(), lat.tau2()};
  const Vec2 b[2] = {lat.dual1(), lat.dual2()};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(dot(b[i], t[j]), i == j ? 2 * pi : 0.0, 2 * pi * 1e-14);
    }
  }
  EXPECT_NEAR(lat.area(), 1.0, 1e-15);
}

TEST(Wavevector, SquareTorusValues) {
  const TorusLattice lat = TorusLattice::unit_square(16);
  const Vec2 zero = wavevector(0, 0, lat);
  EXPECT_EQ(zero.x, 0.0);
  EXPECT_EQ(zero.y, 0.0);
  const Vec2 k10 = wavevector(1, 0, lat);
  EXPECT_NEAR(k10.x, 2 * pi, 1e-14);
  EXPECT_NEAR(k10.y, 0.0, 1e-14);
  EXPECT_THROW(wavevector(9, 0, lat), Error);
  EXPECT_THROW(wavevector(0, -9, lat), Error);
}

TEST(Integrate, ClosedForms) {
  const TorusLattice lat = TorusLattice::unit_square(64);
  EXPECT_NEAR(integrate(ScalarGrid(lat, 1.0)), 1.0, 1e-15);
  EXPECT_NEAR(integrate(plane_wave(lat, 1, 0)), 0.0, 1e-14);
  // cos(2 pi x) cos(2 pi x) integrates to 1/2; cos(2 pi x) cos(4 pi y) to 0.
  EXPECT_NEAR(integrate(plane_wave(lat, 1, 0) * plane_wave(lat, 1, 0)), 0.5, 1e-12);
  EXPECT_NEAR(integrate(plane_wave(lat, 1, 0) * plane_wave(lat, 0, 2)), 0.0, 1e-12);
  // sin^2(2 pi (x + 2y)) on a 2 x 1 rectangle: half the area.
  const TorusLattice rect({2.0, 0.0}, {0.0, 1.0}, 64, 32);
  const ScalarGrid s = ScalarGrid::from_function(rect, [](Vec2 x) { return std::pow(std::sin(pi * x.x + 4 * pi * x.y), 2); });
  EXPECT_NEAR(integrate(s), 1.0, 1e-12);
}

TEST(Laplacian, EigenfunctionsAndConstants) {
  for (const TorusLattice& lat : {TorusLattice::unit_square(64), sheared(64)}) {
    EXPECT_LE(max_abs(laplacian(ScalarGrid(lat, 3.5))), 1e-10);
    for (auto [m, n] : {std::pair{1, 0}, {2, -3}, {5, 7}}) {
      const ScalarGrid f = plane_wave(lat, m, n);
      const Vec2 k = static_cast<double>(m) * lat.dual1() + static_cast<double>(n) * lat.dual2();
      const ScalarGrid expected = -dot(k, k) * f;
      EXPECT_LE(max_abs(laplacian(f) - expected), 1e-12 * dot(k, k)) << m << "," << n;
    }
  }
}

TEST(Laplacian, IntegratesToZero) {
  std::mt19937_64 rng(7);
  const TorusLattice lat = sheared(64);
  for (int trial = 0; trial < 5; ++trial) {
    const ScalarGrid f = random_band_limited(lat, rng);
    EXPECT_LE(std::abs(integrate(laplacian(f))), 1e-12 * l2_norm(f) * 1e3);
  }
}

TEST(GradientSq, SingleModeAndParseval) {
  const TorusLattice lat = TorusLattice::unit_square(64);
  EXPECT_NEAR(gradient_sq(plane_wave(lat, 1, 0)), 4 * pi * pi / 2, 1e-11);
  EXPECT_EQ(gradient_sq(ScalarGrid(lat, -2.0)), 0.0);
  std::mt19937_64 rng(11);
  for (const TorusLattice& l : {lat, sheared(64)}) {
    const ScalarGrid f = random_band_limited(l, rng);
    const double lhs = gradient_sq(f);
    EXPECT_GT(lhs, 0.0);
    EXPECT_NEAR(lhs, -integrate(f * laplacian(f)), 1e-10 * lhs);
  }
}

TEST(Gradient, MatchesAnalyticDerivative) {
  const TorusLattice lat = sheared(64);
  const ScalarGrid f = plane_wave(lat, 2, 1);
  const Vec2 k = 2.0 * lat.dual1() + lat.dual2();
  const auto g = gradient(f);
  const ScalarGrid s = ScalarGrid::from_function(lat, [k](Vec2 x) { return -std::sin(dot(k, x)); });
  EXPECT_LE(max_abs(g[0] - k.x * s), 1e-11 * norm(k));
  EXPECT_LE(max_abs(g[1] - k.y * s), 1e-11 * norm(k));
}

TEST(PoissonSolve, ModeInversionAndMean) {
  const TorusLattice lat = sheared(64);
  EXPECT_LE(max_abs(poisson_solve(ScalarGrid(lat, 4.0))), 1e-14);
  const ScalarGrid f = plane_wave(lat, 1, 2);
  const Vec2 k = lat.dual1() + 2.0 * lat.dual2();
  EXPECT_LE(max_abs(poisson_solve(f) + (1.0 / dot(k, k)) * f), 1e-14);
}

TEST(PoissonSolve, RoundTripAt64And256WithinBudget) {
  std::mt19937_64 rng(3);
  for (int n : {64, 256}) {
    const TorusLattice lat = TorusLattice::unit_square(n);
    const auto t0 = std::chrono::steady_clock::now();
    const ScalarGrid f = random_band_limited(lat, rng, 12) + 0.7;
    const ScalarGrid u = poisson_solve(f);
    const double rt = l2_norm(laplacian(u) - (f - f.mean())) / l2_norm(f - f.mean());
    const ScalarGrid g = f - f.mean();
    const double back = l2_norm(poisson_solve(laplacian(g)) - g) / l2_norm(g);
    const double parseval = std::abs(gradient_sq(u) + integrate(u * laplacian(u))) / gradient_sq(u);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LE(rt, 1e-11) << n;
    EXPECT_LE(back, 1e-11) << n;
    EXPECT_LE(parseval, 1e-11) << n;
    EXPECT_NEAR(u.mean(), 0.0, 1e-14);
    EXPECT_LE(secs, 1.0) << n;
  }
}

TEST(ShiftedInverse, InvertsSigmaMinusLaplacian) {
  std::mt19937_64 rng(5);
  const TorusLattice lat = sheared(32);
  const ScalarGrid f = random_band_limited(lat, rng) + 1.5;
  const ScalarGrid u = shifted_inverse(f, 2.5);
  EXPECT_LE(l2_norm(2.5 * u - laplacian(u) - f), 1e-12);
}

TEST(Translate, OperatorsCommuteWithCellShift) {
  std::mt19937_64 rng(9);
  const TorusLattice lat = sheared(32);
  const ScalarGrid f = random_band_limited(lat, rng);
  const double scale = max_abs(laplacian(f));
  EXPECT_LE(max_abs(laplacian(translate(f, 1, 0)) - translate(laplacian(f), 1, 0)), 1e-12 * scale);
  EXPECT_LE(max_abs(laplacian(translate(f, 0, -1)) - translate(laplacian(f), 0, -1)), 1e-12 * scale);
  EXPECT_LE(max_abs(poisson_solve(translate(f, 3, 5)) - translate(poisson_solve(f), 3, 5)), 1e-12);
  EXPECT_DOUBLE_EQ(translate(f, 1, 2)(1, 2), f(0, 0));
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  const std::vector<double> xs = {1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(xs), 2.0);
}

TEST(ReducedBasis, IsReducedAndSpansSameLattice) {
  const auto [a, b] = reduced_basis({1.0, 0.0}, {3.2, 1.0});
  EXPECT_LE(norm(a), norm(b) + 1e-15);
  EXPECT_LE(std::abs(dot(a, b)), dot(a, a) / 2 + 1e-15);
  EXPECT_NEAR(a.x * b.y - a.y * b.x, 1.0, 1e-14);
}
