#ifndef CSHV_RUN_HPP
#define CSHV_RUN_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cshv/run_config.hpp"

namespace cshv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitSolver = 2;

/// Periodized Gaussian exp(-|x - center|^2 / (2 width^2)), summed over the
/// neighbouring lattice images so it is smooth across the cell boundary.
ScalarGrid periodic_bump(const TorusLattice& lattice, Vec2 center, double width);

struct MtProbeRow {
  std::string family;  // e.g. "bump_w0.1"
  double t = 0.0;
  int grid = 0;
  double deficit = 0.0;
  double shift_defect = 0.0;  // |deficit(u + 3.7) - deficit(u)|

  static std::string csv_header();
  std::string csv_row() const;
};

/// Amplitudes scanned by the mt-probe mode.
std::vector<double> mt_probe_amplitudes();

/// Deficit of u = t * bump for each amplitude and each declared bump width.
/// The bump centre is drawn from `seed`.
std::vector<MtProbeRow> mt_probe(const TorusLattice& lattice, std::uint64_t seed,
                                 const std::vector<double>& amplitudes = mt_probe_amplitudes());

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Largest relative mismatch between the analytic directional derivative of
/// J and a central difference with step h, over `directions` random
/// mean-zero unit directions.
double gradient_check(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch,
                      std::mt19937_64& rng, int directions = 20, double h = 1e-5);

/// Green residuals, gradient checks, solves at cfg.k, flux and energy
/// identities and the Moser-Trudinger shift invariance.
std::vector<VerifyCheck> verify_suite(const RunConfig& cfg, const GreenData& green, std::ostream& log);

/// Runs one mode and writes its artifacts under cfg.out_dir. Returns
/// kExitOk, kExitInvalid (validation) or kExitSolver (non-convergence or a
/// failed check; artifacts are still written).
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace cshv

#endif  // CSHV_RUN_HPP
