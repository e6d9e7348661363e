#include "cshv/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cshv/error.hpp"
#include "cshv/grid_io.hpp"

namespace cshv {

namespace {

constexpr double kPi = std::numbers::pi;

double masked_integral(const ScalarGrid& f, const ScalarGrid& mask) {
  return integrate(f * mask);
}

}  // namespace

FieldSet reconstruct_fields(const ScalarGrid& u, const GreenData& green, const CouplingParams& params) {
  const TorusLattice& L = green.lattice;
  const double k = params.k;
  const double prefactor = 2.0 / (k * k);

  ScalarGrid v = green.u0 + u;
  ScalarGrid phi_sq = (green.log_K + u).map([](double x) { return std::exp(x); });
  ScalarGrid F12 = phi_sq.map([prefactor](double p) { return prefactor * p * (1.0 - p); });
  ScalarGrid curvature = -0.5 * (green.laplacian_u0 + laplacian(u));

  const auto du = gradient(u);
  ScalarGrid A1 = 0.5 * (green.grad_u0[1] + du[1]);
  ScalarGrid A2 = -0.5 * (green.grad_u0[0] + du[0]);
  for (const Vortex& vx : green.vortices.vortices()) {
    const Vec2 p = L.from_lattice_coords(vx.z);
    for (int i = 0; i < L.nx(); ++i) {
      for (int j = 0; j < L.ny(); ++j) {
        const Vec2 d = L.point(i, j) - p;
        const double r2 = dot(d, d);
        if (r2 == 0.0) continue;
        A1(i, j) += -vx.multiplicity * d.y / r2;
        A2(i, j) += vx.multiplicity * d.x / r2;
      }
    }
  }

  ScalarGrid offvortex = green.vortex_distance.map([](double d) { return d > kQuotientMaskCells ? 1.0 : 0.0; });
  ScalarGrid A0(L), A0_mask(L);
  for (std::size_t n = 0; n < L.size(); ++n) {
    if (offvortex[n] > 0.0 && phi_sq[n] >= kPhiSqFloor) {
      A0[n] = -0.5 * k * F12[n] / phi_sq[n];
      A0_mask[n] = 1.0;
    }
  }
  return FieldSet{k,          std::move(v),  std::move(phi_sq),  std::move(F12),
                  std::move(A1), std::move(A2), std::move(A0), std::move(A0_mask),
                  std::move(curvature), std::move(offvortex)};
}

double flux(const FieldSet& fields) { return integrate(fields.F12); }

EnergyReport energy(const FieldSet& fields, const GreenData& green) {
  const double k = fields.k;
  ScalarGrid integrand(fields.phi_sq.lattice());
  for (std::size_t n = 0; n < integrand.size(); ++n) {
    const double p = fields.phi_sq[n];
    if (fields.offvortex[n] == 0.0 || p < kPhiSqFloor) continue;
    const double mod = std::sqrt(p);
    const double t = 0.5 * k * fields.curvature[n] / mod - mod * (1.0 - p) / k;
    integrand[n] = t * t;
  }
  const double excess = integrate(integrand);
  return {2.0 * kPi * green.degree() + excess, excess};
}

double selfdual_residual(const ScalarGrid& u, const GreenData& green, const CouplingParams& params) {
  const FieldSet f = reconstruct_fields(u, green, params);
  const ScalarGrid diff = f.curvature - f.F12;
  return std::sqrt(masked_integral(diff * diff, f.offvortex));
}

double curl_defect(const FieldSet& fields, const GreenData& green, double min_cells) {
  const ScalarGrid u = fields.v - green.u0;
  const ScalarGrid v_reg = green.u0_regular + u;
  const auto g = gradient(v_reg);
  ScalarGrid curl = -0.5 * (gradient(g[0])[0] + gradient(g[1])[1]);
  curl.axpy(-0.5, green.laplacian_u0 - laplacian(green.u0_regular));
  double worst = 0.0;
  for (std::size_t n = 0; n < curl.size(); ++n) {
    if (green.vortex_distance[n] > min_cells) worst = std::max(worst, std::abs(curl[n] - fields.F12[n]));
  }
  return worst;
}

std::vector<double> ball_mass(const FieldSet& fields, Vec2 center, const std::vector<double>& radii) {
  const TorusLattice& L = fields.phi_sq.lattice();
  for (double r : radii) {
    if (!(r >= 0.0) || r > L.covering_radius() * (1.0 + 1e-12)) {
      throw Error(ErrorKind::RadiusTooLarge, "ball radius " + format_number(r) + " exceeds the covering radius");
    }
  }
  ScalarGrid dist(L);
  for (int i = 0; i < L.nx(); ++i)
    for (int j = 0; j < L.ny(); ++j) dist(i, j) = norm(L.min_image(L.point(i, j) - center));
  const double total = integrate(fields.phi_sq);
  std::vector<double> out;
  for (double r : radii) {
    const ScalarGrid inside = dist.map([r](double d) { return d <= r ? 1.0 : 0.0; });
    out.push_back(masked_integral(fields.phi_sq, inside) / total);
  }
  return out;
}

Diagnostics diagnose(const FieldSet& f, const GreenData& green) {
  Diagnostics d;
  d.flux = flux(f);
  d.flux_err = std::abs(d.flux - 2.0 * kPi * green.degree());
  d.mass = integrate(f.phi_sq);
  const EnergyReport e = energy(f, green);
  d.energy = e.energy;
  d.energy_excess = e.excess;
  const ScalarGrid diff = f.curvature - f.F12;
  d.selfdual_residual = std::sqrt(masked_integral(diff * diff, f.offvortex));
  d.sup_phi = std::sqrt(f.phi_sq.max());
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < f.phi_sq.size(); ++n) {
    if (f.offvortex[n] > 0.0) lo = std::min(lo, f.phi_sq[n]);
  }
  d.inf_phi_offvortex = std::sqrt(lo);
  return d;
}

Diagnostics diagnose(const ScalarGrid& u, const GreenData& green, const CouplingParams& params) {
  return diagnose(reconstruct_fields(u, green, params), green);
}

void export_fields(const std::filesystem::path& dir, const std::string& prefix, const FieldSet& fields,
                   const ScalarGrid& u, const std::string& metadata) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const ScalarGrid*> grids[] = {
      {"u", &u},          {"v", &fields.v},   {"phi_sq", &fields.phi_sq}, {"F12", &fields.F12},
      {"A1", &fields.A1}, {"A2", &fields.A2}, {"A0", &fields.A0},         {"A0_mask", &fields.A0_mask}};
  for (const auto& [name, grid] : grids) write_cshgrid(dir / (prefix + name + ".cshgrid"), *grid);
  std::string meta = metadata;
  if (!meta.empty() && meta.back() != '\n') meta += '\n';
  meta += "k = " + format_number(fields.k) + "\n";
  meta += "A0_mask = |phi|^2 >= " + format_number(kPhiSqFloor) + " and distance > " +
          format_number(kQuotientMaskCells) + " cells from every vortex\n";
  meta += "gauge = A1, A2 gauge-dependent; branch-cut: phase arg(x - p_j) taken in the fundamental domain, "
          "A jumps across its boundary\n";
  write_file_atomic(dir / (prefix + "meta.txt"), meta);
}

}  // namespace cshv
