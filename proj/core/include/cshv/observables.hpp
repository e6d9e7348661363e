#ifndef CSHV_OBSERVABLES_HPP
#define CSHV_OBSERVABLES_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "cshv/functionals.hpp"
#include "cshv/green_vortex.hpp"

namespace cshv {

/// Fields of one solution u. v = u0 + u, |phi|^2 = e^v,
/// F12 = (2/k^2) |phi|^2 (1 - |phi|^2).
///
/// A = (1/2) (d2 v, -d1 v) + grad sum_j m_j arg(x - p_j), with x - p_j taken
/// in the fundamental domain. The log singularity of v cancels the phase
/// term at each vortex, so A is finite there, but it jumps across the
/// boundary of the fundamental domain (gauge transition).
struct FieldSet {
  double k = 0.0;
  ScalarGrid v;
  ScalarGrid phi_sq;
  ScalarGrid F12;
  ScalarGrid A1;
  ScalarGrid A2;
  ScalarGrid A0;       // zero where masked
  ScalarGrid A0_mask;  // 1 where A0 is valid
  /// -(1/2) Lap v with the vortex singularities differentiated analytically.
  ScalarGrid curvature;
  /// Off-vortex quotient mask: 1 farther than 3 cells from every vortex.
  ScalarGrid offvortex;
};

inline constexpr double kQuotientMaskCells = 3.0;
inline constexpr double kPhiSqFloor = 1e-8;

FieldSet reconstruct_fields(const ScalarGrid& u, const GreenData& green, const CouplingParams& params);

/// integral F12
double flux(const FieldSet& fields);

struct EnergyReport {
  double energy = 0.0;  // 2 pi N + excess
  double excess = 0.0;
};

/// excess = int (k/2 F/|phi| - (1/k) |phi| (1 - |phi|^2))^2 over the
/// off-vortex mask, with F the curvature -(1/2) Lap v. The first-order term
/// |(D1 + i D2) phi|^2 vanishes by construction of A.
EnergyReport energy(const FieldSet& fields, const GreenData& green);

/// L2 norm over the off-vortex mask of -(1/2) Lap v - (2/k^2) e^v (1 - e^v).
/// For any u this is half the masked norm of the PDE residual.
double selfdual_residual(const ScalarGrid& u, const GreenData& green, const CouplingParams& params);

/// Largest |curl A - F12| over cells farther than `min_cells` from every
/// vortex, curl taken spectrally on the smooth part of A.
double curl_defect(const FieldSet& fields, const GreenData& green, double min_cells = 5.0);

/// int_{B_r(center)} |phi|^2 / int |phi|^2 for each r (min-image distance).
/// Throws RadiusTooLarge beyond the covering radius.
std::vector<double> ball_mass(const FieldSet& fields, Vec2 center, const std::vector<double>& radii);

struct Diagnostics {
  double flux = 0.0;
  double flux_err = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double energy_excess = 0.0;
  double selfdual_residual = 0.0;
  double sup_phi = 0.0;
  double inf_phi_offvortex = 0.0;
};

Diagnostics diagnose(const ScalarGrid& u, const GreenData& green, const CouplingParams& params);
Diagnostics diagnose(const FieldSet& fields, const GreenData& green);

/// One CSHGRID file per field under `dir` with the given prefix, plus
/// `<prefix>meta.txt` holding `metadata` and the mask and gauge notes.
void export_fields(const std::filesystem::path& dir, const std::string& prefix, const FieldSet& fields,
                   const ScalarGrid& u, const std::string& metadata);

}  // namespace cshv

#endif  // CSHV_OBSERVABLES_HPP
