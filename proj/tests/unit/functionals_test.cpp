#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cshv/error.hpp"
#include "cshv/functionals.hpp"

using namespace cshv;
using std::numbers::pi;

namespace {

const GreenData& green128() {
  static const GreenData g = green_u0(TorusLattice::unit_square(128), VortexConfig::default_pair());
  return g;
}

ScalarGrid random_mean_zero(const TorusLattice& lat, std::mt19937_64& rng, double amplitude) {
  ScalarGrid d = random_band_limited(lat, rng);
  d -= d.mean();
  return amplitude * d;
}

// Direct quadrature oracle for B, independent of the log-space implementation.
double naive_B(const ScalarGrid& w, const GreenData& g, double lambda) {
  const ScalarGrid p = (g.log_K + w).map([](double x) { return std::exp(x); });
  const double a = integrate(p);
  return 32 * pi / lambda * integrate(p * p) / (a * a);
}

}  // namespace

TEST(CouplingParams, LambdaFromK) {
  for (double k : {0.025, 0.1, 0.37}) {
    const CouplingParams c = CouplingParams::from_k(k);
    EXPECT_NEAR(c.lambda * k * k, 4.0, 1e-14);
  }
  EXPECT_THROW(CouplingParams::from_k(0.0), Error);
  EXPECT_THROW(CouplingParams::from_k(-1.0), Error);
  EXPECT_THROW(CouplingParams::from_k(std::nan("")), Error);
}

TEST(BLambda, HolderEqualityAtMinusU0) {
  const GreenData& g = green128();
  for (double lambda : {100.0, 400.0, 6400.0}) {
    const CouplingParams c{2.0 / std::sqrt(lambda), lambda};
    EXPECT_NEAR(B_lambda(-g.u0, g, c), 32 * pi / lambda, 1e-10 * 32 * pi / lambda);
  }
}

TEST(BLambda, MatchesQuadratureAndIsShiftInvariant) {
  const GreenData& g = green128();
  const CouplingParams c = CouplingParams::from_k(0.1);
  std::mt19937_64 rng(21);
  for (int n = 0; n < 5; ++n) {
    const ScalarGrid w = random_mean_zero(g.lattice, rng, 1.5);
    const double b = B_lambda(w, g, c);
    EXPECT_NEAR(b, naive_B(w, g, c.lambda), 1e-12 * b);
    EXPECT_NEAR(B_lambda(w + 37.0, g, c), b, 1e-12 * b);
    EXPECT_NEAR(B_lambda(w - 500.0, g, c), b, 1e-12 * b);
    EXPECT_GE(b, 32 * pi / c.lambda);
  }
  // w = 0: B scales like 1 / lambda.
  const double b0 = B_lambda(ScalarGrid(g.lattice), g, c);
  const double b1 = B_lambda(ScalarGrid(g.lattice), g, CouplingParams::from_k(0.01));
  EXPECT_NEAR(b1 / b0, 1e-2, 1e-14);
}

TEST(BLambda, DegenerateMassOnNonFinite) {
  const GreenData& g = green128();
  ScalarGrid w(g.lattice);
  w[5] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(B_lambda(w, g, CouplingParams::from_k(0.1)), Error);
}

TEST(JBranch, ZeroFieldClosedForms) {
  const GreenData& g = green128();
  const CouplingParams c = CouplingParams::from_k(0.1);
  const ScalarGrid zero(g.lattice);
  const double intK = integrate(g.K);
  const double B0 = 32 * pi / c.lambda * integrate(g.K * g.K) / (intK * intK);
  const double s = std::sqrt(1 - B0);
  auto tail = [&](double D) { return -8 * pi * std::log(intK) - 8 * pi * std::log(D) - 8 * pi / D; };

  const FunctionalReport minus = J_branch(zero, g, c, Branch::minus);
  EXPECT_NEAR(minus.J, tail(1 + s), 1e-10 * std::abs(minus.J));
  EXPECT_EQ(minus.dirichlet, 0.0);
  EXPECT_TRUE(minus.feasible);

  const FunctionalReport plus = J_branch(zero, g, c, Branch::plus);
  EXPECT_NEAR(plus.J, tail(1 - s), 1e-10 * std::abs(plus.J));
  EXPECT_NEAR(plus.D, 1 - s, 1e-14);
  EXPECT_NEAR(plus.logmass, std::log(intK), 1e-13);
}

TEST(JBranch, BranchesMeetOnTheBoundary) {
  const GreenData& g = green128();
  const ScalarGrid zero(g.lattice);
  const double intK = integrate(g.K);
  // Pick lambda so that B(0) = 1 up to rounding.
  const double lambda = 32 * pi * integrate(g.K * g.K) / (intK * intK);
  const CouplingParams c{2.0 / std::sqrt(lambda), lambda};
  const FunctionalReport p = J_branch(zero, g, c, Branch::plus);
  const FunctionalReport m = J_branch(zero, g, c, Branch::minus);
  EXPECT_NEAR(p.B, 1.0, 1e-12);
  EXPECT_NEAR(p.J, m.J, 1e-5);
}

TEST(JBranch, InfeasibleAndDegenerate) {
  const GreenData& g = green128();
  const ScalarGrid zero(g.lattice);
  EXPECT_THROW(J_branch(zero, g, CouplingParams::from_k(0.5), Branch::minus), Error);
  try {
    J_branch(zero, g, CouplingParams::from_k(0.5), Branch::plus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
  EXPECT_THROW(branch_denominator(1.1, Branch::minus), Error);
  EXPECT_NO_THROW(branch_denominator(1.0 + 1e-13, Branch::plus));
  try {
    branch_denominator(1e-310, Branch::plus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateDenominator);
  }
  EXPECT_EQ(branch_denominator(0.0, Branch::minus), 2.0);
}

TEST(JBranch, PlusBranchTermNeverExceedsMinus) {
  // f(D) = -8 pi log D - 8 pi / D peaks at D = 1, and D+ = 2 - D- sits on the
  // steeper side, so f(D+) <= f(D-) with equality only at B = 1.
  auto f = [](double D) { return -8 * pi * std::log(D) - 8 * pi / D; };
  for (double B = 1e-6; B <= 1.0; B += 0.001) {
    const double dp = branch_denominator(B, Branch::plus), dm = branch_denominator(B, Branch::minus);
    EXPECT_NEAR(dp + dm, 2.0, 1e-14);
    EXPECT_NEAR(dp * dm, B, 1e-14);
    EXPECT_LE(f(dp), f(dm) + 1e-12) << B;
    EXPECT_LE(f(dm), f(1.0));
  }
  // Same w, both branches: J+ <= J-.
  const GreenData& g = green128();
  const ScalarGrid zero(g.lattice);
  const CouplingParams c = CouplingParams::from_k(0.1);
  EXPECT_LT(J_branch(zero, g, c, Branch::plus).J, J_branch(zero, g, c, Branch::minus).J);
}

TEST(GradJ, MeanZeroAndFiniteDifferences) {
  const GreenData& g = green128();
  std::mt19937_64 rng(99);
  for (double k : {0.1, 0.05}) {
    const CouplingParams c = CouplingParams::from_k(k);
    for (Branch br : {Branch::plus, Branch::minus}) {
      const ScalarGrid w = random_mean_zero(g.lattice, rng, 0.5);
      const ScalarGrid grad = grad_J(w, g, c, br);
      EXPECT_NEAR(grad.mean(), 0.0, 1e-12 * l2_norm(grad));
      for (int n = 0; n < 5; ++n) {
        ScalarGrid eta = random_mean_zero(g.lattice, rng, 1.0);
        eta *= 1.0 / l2_norm(eta);
        const double t = 1e-5;
        const double fd = (J_branch(w + t * eta, g, c, br).J - J_branch(w - t * eta, g, c, br).J) / (2 * t);
        const double an = integrate(grad * eta);
        EXPECT_NEAR(fd, an, 1e-5 * std::abs(an)) << to_string(br) << " k=" << k;
      }
    }
  }
}

TEST(ILambda, ConstantFields) {
  const GreenData& g = green128();
  const CouplingParams c = CouplingParams::from_k(0.1);
  for (double cst : {-1.0, 0.0, 0.7}) {
    const ScalarGrid u(g.lattice, cst);
    const ScalarGrid gap = g.K.map([cst](double K) { return std::pow(K * std::exp(cst) - 1, 2); });
    EXPECT_NEAR(I_lambda(u, g, c), c.lambda / 4 * integrate(gap) + 8 * pi * cst, 1e-10 * c.lambda);
  }
  // Ke^u == 1 removes the potential term.
  const ScalarGrid u = -g.u0;
  EXPECT_NEAR(I_lambda(u, g, c), 0.5 * gradient_sq(u) + 8 * pi * integrate(u), 1e-9 * gradient_sq(u));
}

TEST(MtDeficit, ConstantsShiftsAndLargeAmplitude) {
  const TorusLattice lat = TorusLattice::unit_square(64);
  EXPECT_NEAR(mt_deficit(ScalarGrid(lat, 3.0)), 0.0, 1e-14);
  EXPECT_NEAR(mt_deficit(ScalarGrid(lat, -800.0)), 0.0, 1e-12);
  std::mt19937_64 rng(4);
  const ScalarGrid u = random_band_limited(lat, rng);
  EXPECT_NEAR(mt_deficit(u + 12.5), mt_deficit(u), 1e-10);
  // The t^2 Dirichlet term wins for large t.
  double t0 = 0.0;
  for (double t = 1; t <= 1024; t *= 2) {
    if (mt_deficit(t * u) > 0 && t0 == 0.0) t0 = t;
  }
  ASSERT_GT(t0, 0.0);
  for (double t = t0; t <= 4096; t *= 2) EXPECT_GT(mt_deficit(t * u), 0.0) << t;
}

TEST(FunctionalReport, CsvShape) {
  const GreenData& g = green128();
  const FunctionalReport r = J_branch(ScalarGrid(g.lattice), g, CouplingParams::from_k(0.1), Branch::minus);
  EXPECT_EQ(FunctionalReport::csv_header(), "k,lambda,branch,B,D,J,dirichlet,logmass,feasible");
  const std::string row = r.csv_row();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 8);
  EXPECT_EQ(row.substr(0, 14), "0.1,400,minus,");
  EXPECT_EQ(row.substr(row.size() - 4), "true");
}
