#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <unistd.h>

#include "cshv/error.hpp"
#include "cshv/grid_io.hpp"
#include "cshv/observables.hpp"
#include "cshv/solver.hpp"

using namespace cshv;
using std::numbers::pi;

namespace {

const GreenData& green128() {
  static const GreenData g = green_u0(TorusLattice::unit_square(128), VortexConfig::default_pair());
  return g;
}

const CouplingParams kCoupling = CouplingParams::from_k(0.1);

const BranchSolution& plus128() {
  static const BranchSolution s = [] {
    SolverParams p;
    p.coupling = kCoupling;
    return solve_branch(p, green128(), Branch::plus);
  }();
  return s;
}

ScalarGrid random_field(const TorusLattice& lat, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  ScalarGrid d = random_band_limited(lat, rng);
  d -= d.mean();
  return amplitude * d;
}

}  // namespace

TEST(Fields, HiggsVanishesAtVorticesAndA0Formula) {
  const GreenData& g = green128();
  const ScalarGrid u = random_field(g.lattice, 2, 0.4) - 0.3;
  const FieldSet f = reconstruct_fields(u, g, kCoupling);
  for (std::size_t c : g.vortex_cells) EXPECT_LE(f.phi_sq[c], 1e-12);
  int valid = 0;
  for (std::size_t n = 0; n < f.A0.size(); ++n) {
    if (f.A0_mask[n] == 0.0) {
      EXPECT_EQ(f.A0[n], 0.0);
      continue;
    }
    ++valid;
    EXPECT_NEAR(f.A0[n], -(1.0 - f.phi_sq[n]) / kCoupling.k, 1e-10);
  }
  EXPECT_GT(valid, static_cast<int>(0.9 * f.A0.size()));
}

TEST(Fields, FluxOfZeroCorrection) {
  const GreenData& g = green128();
  const FieldSet f = reconstruct_fields(ScalarGrid(g.lattice), g, kCoupling);
  const double want = 2 / (kCoupling.k * kCoupling.k) * integrate(g.K - g.K * g.K);
  EXPECT_NEAR(flux(f), want, 1e-10 * std::abs(want));
}

TEST(Fields, CurlOfPotentialMatchesCurvature) {
  const GreenData& g = green128();
  const ScalarGrid u = random_field(g.lattice, 5, 0.5);
  const FieldSet f = reconstruct_fields(u, g, kCoupling);
  // curl A - F12 is the pointwise self-dual mismatch; compare with curvature - F12.
  const ScalarGrid mismatch = f.curvature - f.F12;
  double worst = 0.0;
  for (std::size_t n = 0; n < mismatch.size(); ++n) {
    if (g.vortex_distance[n] > 5.0) worst = std::max(worst, std::abs(mismatch[n]));
  }
  EXPECT_NEAR(curl_defect(f, g), worst, 1e-6 * worst);
}

TEST(Fields, SelfDualResidualIsHalfThePdeResidual) {
  const GreenData& g = green128();
  const ScalarGrid u = random_field(g.lattice, 6, 0.5) - 0.2;
  const FieldSet f = reconstruct_fields(u, g, kCoupling);
  const ScalarGrid r = pde_residual(u, g, kCoupling);
  const double half = 0.5 * std::sqrt(integrate(r * r * f.offvortex));
  // The only gap is how far the off-vortex Laplacian of u0 is from -4 pi N / area.
  const ScalarGrid lap_gap = (g.laplacian_u0 + 8 * pi) * f.offvortex;
  EXPECT_NEAR(selfdual_residual(u, g, kCoupling), half, 0.5 * l2_norm(lap_gap) + 1e-12);
}

TEST(Energy, ExcessNonNegativeAndVanishesAtSolutions) {
  const GreenData& g = green128();
  for (std::uint64_t seed : {1, 2, 3}) {
    const FieldSet f = reconstruct_fields(random_field(g.lattice, seed, 0.7), g, kCoupling);
    const EnergyReport e = energy(f, g);
    EXPECT_GE(e.excess, 0.0);
    EXPECT_NEAR(e.energy, 4 * pi + e.excess, 1e-12);
  }
  const BranchSolution& s = plus128();
  ASSERT_TRUE(s.converged);
  const Diagnostics d = diagnose(s.u, g, kCoupling);
  EXPECT_LE(d.energy_excess, 1e-6);
  EXPECT_LE(d.flux_err, 1e-9);
  EXPECT_NEAR(d.mass, s.mass, 1e-12 * s.mass);
  EXPECT_LE(d.sup_phi, 1.0);
  EXPECT_GT(d.inf_phi_offvortex, 0.0);
  EXPECT_LE(curl_defect(reconstruct_fields(s.u, g, kCoupling), g), 1e-2);
}

TEST(BallMass, MonotoneAndFullAtCoveringRadius) {
  const GreenData& g = green128();
  const FieldSet f = reconstruct_fields(plus128().u, g, kCoupling);
  const double R = g.lattice.covering_radius();
  const auto m = ball_mass(f, {0.3, 0.6}, {0.0, 0.1, 0.2, 0.4, R});
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_GE(m[i], m[i - 1]);
  EXPECT_NEAR(m.back(), 1.0, 1e-12);
  try {
    ball_mass(f, {0.3, 0.6}, {1.01 * R});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RadiusTooLarge);
  }
}

TEST(ExportFields, WritesGridsAndMetadata) {
  const GreenData& g = green128();
  const ScalarGrid u = random_field(g.lattice, 9, 0.2);
  const FieldSet f = reconstruct_fields(u, g, kCoupling);
  const auto dir = std::filesystem::temp_directory_path() / ("cshv_export_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  export_fields(dir, "plus_", f, u, "branch = plus");
  for (const char* name : {"u", "v", "phi_sq", "F12", "A1", "A2", "A0", "A0_mask"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string("plus_") + name + ".cshgrid"))) << name;
  }
  EXPECT_EQ(max_abs(read_cshgrid(dir / "plus_phi_sq.cshgrid") - f.phi_sq), 0.0);
  std::ifstream in(dir / "plus_meta.txt");
  std::stringstream meta;
  meta << in.rdbuf();
  EXPECT_NE(meta.str().find("branch = plus"), std::string::npos);
  EXPECT_NE(meta.str().find("k = 0.1"), std::string::npos);
  EXPECT_NE(meta.str().find("branch-cut"), std::string::npos);
  std::filesystem::remove_all(dir);
}
