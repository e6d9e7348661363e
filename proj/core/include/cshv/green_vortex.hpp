#ifndef CSHV_GREEN_VORTEX_HPP
#define CSHV_GREEN_VORTEX_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cshv/spectral_torus.hpp"

namespace cshv {

struct Vortex {
  Vec2 z;  // lattice coordinates in [0, 1)^2
  int multiplicity = 1;
};

class VortexConfig {
 public:
  VortexConfig() = default;
  explicit VortexConfig(std::vector<Vortex> vortices);

  /// Two simple vortices at (1/4, 1/4) and (3/4, 3/4).
  static VortexConfig default_pair();

  const std::vector<Vortex>& vortices() const { return vortices_; }
  std::size_t size() const { return vortices_.size(); }
  int degree() const;
  /// Two-branch guarantees only hold for total degree 2.
  bool best_effort() const { return degree() != 2; }

  /// Throws InvalidArgument on empty configs, coordinates outside [0, 1),
  /// non-positive multiplicities or coincident points.
  void validate() const;

 private:
  std::vector<Vortex> vortices_;
};

enum class GreenMethod { theta, smeared };

const char* to_string(GreenMethod m);

struct GreenOptions {
  bool snap_to_grid = true;
  /// Gaussian width for the smeared method; 0 means two cell sizes.
  double smear_width = 0.0;
  /// Lower clamp for u0 before exponentiation.
  double clamp = -745.0;
};

/// u0 with Laplacian u0 = -4 pi N / |Sigma| + 4 pi sum m_j delta_{p_j},
/// integral u0 = 0, and the weight K = exp(u0).
///
/// For the theta method u0 = u0_regular + sum_j m_j S(|x - p_j|), where S is
/// the compactly supported log singularity; grid values of u0 at vortex
/// points are the clamp value.
struct GreenData {
  TorusLattice lattice;
  VortexConfig vortices;  // after snapping
  GreenMethod method;
  double clamp;
  double smear_width;  // 0 for theta

  ScalarGrid u0;
  ScalarGrid u0_regular;
  ScalarGrid log_K;  // max(u0, clamp)
  ScalarGrid K;
  /// Laplacian of u0 with the log singularity differentiated analytically.
  ScalarGrid laplacian_u0;
  /// Gradient of u0, singular part analytic; zero at vortex points.
  std::array<ScalarGrid, 2> grad_u0;
  /// Min-image distance to the nearest vortex point, in cell sizes.
  ScalarGrid vortex_distance;
  std::vector<std::size_t> vortex_cells;
  std::vector<std::string> warnings;

  int degree() const { return vortices.degree(); }
  /// Mean of u0 with the singular part integrated exactly.
  double continuum_mean;
  /// Continuum mean of the theta construction before that correction; zero
  /// analytically, so its size measures quadrature and truncation error.
  double raw_mean = 0.0;
};

GreenData green_u0(const TorusLattice& lattice, const VortexConfig& vortices,
                   GreenMethod method = GreenMethod::theta, const GreenOptions& options = {});

/// max |Laplacian u0 + 4 pi N / |Sigma|| over grid points farther than
/// `min_cells` cell sizes from every vortex.
double u0_residual(const GreenData& data, double min_cells = 5.0);

}  // namespace cshv

#endif  // CSHV_GREEN_VORTEX_HPP
