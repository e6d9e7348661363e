#ifndef CSHV_RUN_CONFIG_HPP
#define CSHV_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cshv/green_vortex.hpp"
#include "cshv/solver.hpp"

namespace cshv {

enum class Mode { solve, continuation, kc, verify, mt_probe };

const char* to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Default k list of the `continue` mode.
std::vector<double> default_k_list();

struct RunConfig {
  Mode mode = Mode::solve;
  Vec2 tau1{1.0, 0.0};
  Vec2 tau2{0.0, 1.0};
  int nx = 256;
  int ny = 256;
  VortexConfig vortices = VortexConfig::default_pair();
  GreenMethod green_method = GreenMethod::theta;
  bool snap_to_grid = true;
  double k = 0.1;
  std::vector<double> k_list = default_k_list();
  double tol_grad = 1e-8;
  double tol_pde = 1e-10;
  int max_outer = 3000;
  double barrier_strength = 1e-3;
  double newton_threshold = 1e-2;
  std::uint64_t seed = 20240611;
  int threads = 2;  // capped by CSH_THREADS in the tool
  double kc_lo = 0.05;
  double kc_hi = 0.25;
  double kc_width = 1e-3;
  std::filesystem::path out_dir = "cshv_out";
  bool export_fields = true;
  bool quiet = false;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;

  TorusLattice lattice() const { return TorusLattice(tau1, tau2, nx, ny); }
  SolverParams solver_params(double k_value) const;
  /// key = value lines describing this config (recorded next to outputs).
  std::string describe() const;
};

/// Parses flat `key = value` text; `#` starts a comment. Repeated
/// `vortex = z1, z2, m` lines (m optional) replace the default vortices, as
/// does `vortices = [(z1, z2, m), ...]`. Throws InvalidArgument with the
/// line number on malformed input.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace cshv

#endif  // CSHV_RUN_CONFIG_HPP
