#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cshv/linear_solvers.hpp"

using namespace cshv;

TEST(Minres, SolvesShiftedLaplacianExactlyPreconditioned) {
  std::mt19937_64 rng(1);
  const TorusLattice lat = TorusLattice::unit_square(32);
  const ScalarGrid b = random_band_limited(lat, rng) + 0.3;
  const GridOperator A = [](const ScalarGrid& x) { return 4.0 * x - laplacian(x); };
  const GridOperator M = [](const ScalarGrid& x) { return shifted_inverse(x, 4.0); };
  const LinearSolveResult r = minres(A, M, b, 1e-12, 50);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LE(l2_norm(A(r.x) - b), 1e-11 * l2_norm(b));
}

TEST(Minres, VariableCoefficientIndefiniteOperator) {
  std::mt19937_64 rng(2);
  const TorusLattice lat = TorusLattice::unit_square(32);
  // c changes sign, so c - Lap is indefinite on the low modes.
  const ScalarGrid c = ScalarGrid::from_function(lat, [](Vec2 x) { return 30.0 * std::cos(2 * M_PI * x.x) - 5.0; });
  const ScalarGrid b = random_band_limited(lat, rng);
  const GridOperator A = [&c](const ScalarGrid& x) { return c * x - laplacian(x); };
  const GridOperator M = [](const ScalarGrid& x) { return shifted_inverse(x, 30.0); };
  const LinearSolveResult r = minres(A, M, b, 1e-10, 500);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(l2_norm(A(r.x) - b), 1e-8 * l2_norm(b));
}

TEST(Minres, ZeroRightHandSide) {
  const TorusLattice lat = TorusLattice::unit_square(16);
  const GridOperator I = [](const ScalarGrid& x) { return x; };
  const LinearSolveResult r = minres(I, I, ScalarGrid(lat), 1e-10, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(max_abs(r.x), 0.0);
}
