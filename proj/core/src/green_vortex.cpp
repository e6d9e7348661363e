#include "cshv/green_vortex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cshv/error.hpp"
#include "cshv/theta_green.hpp"

namespace cshv {

namespace {

constexpr double kPi = std::numbers::pi;

// Nearest grid index of lattice coordinate z, wrapped into [0, n).
int nearest_index(double z, int n) {
  const int i = static_cast<int>(std::lround(z * n));
  return ((i % n) + n) % n;
}

}  // namespace

VortexConfig::VortexConfig(std::vector<Vortex> vortices) : vortices_(std::move(vortices)) {}

VortexConfig VortexConfig::default_pair() {
  return VortexConfig({{{0.25, 0.25}, 1}, {{0.75, 0.75}, 1}});
}

int VortexConfig::degree() const {
  int n = 0;
  for (const auto& v : vortices_) n += v.multiplicity;
  return n;
}

void VortexConfig::validate() const {
  if (vortices_.empty()) throw Error(ErrorKind::InvalidArgument, "no vortex points given");
  for (const auto& v : vortices_) {
    if (!(v.z.x >= 0.0 && v.z.x < 1.0 && v.z.y >= 0.0 && v.z.y < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "vortex coordinates must lie in [0, 1)");
    }
    if (v.multiplicity < 1) throw Error(ErrorKind::InvalidArgument, "vortex multiplicity must be positive");
  }
  for (std::size_t a = 0; a < vortices_.size(); ++a) {
    for (std::size_t b = a + 1; b < vortices_.size(); ++b) {
      const Vec2 d = vortices_[a].z - vortices_[b].z;
      const double dx = d.x - std::round(d.x);
      const double dy = d.y - std::round(d.y);
      if (std::hypot(dx, dy) < 1e-12) {
        throw Error(ErrorKind::InvalidArgument, "vortex points coincide; merge them into one multiplicity");
      }
    }
  }
}

const char* to_string(GreenMethod m) { return m == GreenMethod::theta ? "theta" : "smeared"; }

GreenData green_u0(const TorusLattice& lattice, const VortexConfig& vortices, GreenMethod method,
                   const GreenOptions& options) {
  vortices.validate();
  const int nx = lattice.nx();
  const int ny = lattice.ny();

  std::vector<Vortex> placed = vortices.vortices();
  std::vector<std::size_t> cells;
  for (auto& v : placed) {
    const int i = nearest_index(v.z.x, nx);
    const int j = nearest_index(v.z.y, ny);
    if (options.snap_to_grid) v.z = {static_cast<double>(i) / nx, static_cast<double>(j) / ny};
    cells.push_back(static_cast<std::size_t>(i) * ny + j);
  }
  VortexConfig snapped(placed);
  if (options.snap_to_grid) snapped.validate();

  std::vector<Vec2> centers;
  for (const auto& v : placed) centers.push_back(lattice.from_lattice_coords(v.z));

  ScalarGrid distance(lattice, std::numeric_limits<double>::infinity());
  const double h = lattice.cell_size();
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Vec2 x = lattice.point(i, j);
      for (const Vec2& p : centers) {
        distance(i, j) = std::min(distance(i, j), norm(lattice.min_image(x - p)) / h);
      }
    }
  }

  std::vector<std::string> warnings;
  if (snapped.best_effort()) {
    warnings.push_back("total degree " + std::to_string(snapped.degree()) +
                       " != 2: two-branch results are best-effort");
  }

  const double area = lattice.area();
  ScalarGrid u0(lattice), regular(lattice), lap(lattice);
  std::array<ScalarGrid, 2> grad{ScalarGrid(lattice), ScalarGrid(lattice)};
  double smear = 0.0;
  double continuum_mean = 0.0;
  double raw_mean = 0.0;

  if (method == GreenMethod::theta) {
    const ThetaGreen g(lattice.tau1(), lattice.tau2());
    ScalarGrid singular(lattice), singular_lap(lattice), sx(lattice), sy(lattice);
    double singular_total = 0.0;
    for (std::size_t v = 0; v < placed.size(); ++v) {
      const double m = placed[v].multiplicity;
      singular_total += m * g.singular_integral();
      for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
          const Vec2 d = lattice.point(i, j) - centers[v];
          regular(i, j) += m * g.regular(d);
          const double r = norm(g.centered(d));
          if (r < g.r_outer()) {
            singular(i, j) += m * g.singular_part(r);
            singular_lap(i, j) += m * g.singular_laplacian(r);
            const Vec2 ds = g.singular_gradient(g.centered(d));
            sx(i, j) += m * ds.x;
            sy(i, j) += m * ds.y;
          }
        }
      }
    }
    // The kernel integrates to zero analytically; remove the quadrature residue.
    raw_mean = (integrate(regular) + singular_total) / area;
    regular -= raw_mean;
    continuum_mean = (integrate(regular) + singular_total) / area;
    u0 = regular + singular;
    lap = laplacian(regular) + singular_lap;
    grad = gradient(regular);
    grad[0] += sx;
    grad[1] += sy;
  } else {
    smear = options.smear_width > 0.0 ? options.smear_width : 2.0 * h;
    ScalarGrid source(lattice);
    for (std::size_t v = 0; v < placed.size(); ++v) {
      ScalarGrid bump(lattice);
      for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
          const Vec2 d = lattice.min_image(lattice.point(i, j) - centers[v]);
          bump(i, j) = std::exp(-dot(d, d) / (2.0 * smear * smear));
        }
      }
      source.axpy(4.0 * kPi * placed[v].multiplicity / integrate(bump), bump);
    }
    regular = poisson_solve(source);
    continuum_mean = regular.mean();
    u0 = regular;
    lap = laplacian(regular);
    grad = gradient(regular);
    warnings.push_back("smeared sources: vanishing order of K at vortices is approximate");
  }

  ScalarGrid log_K = u0.map([&](double x) { return std::max(x, options.clamp); });
  for (double& x : u0.values()) x = std::max(x, options.clamp);
  ScalarGrid K = log_K.map([](double x) { return std::exp(x); });

  return GreenData{lattice,  snapped, method, options.clamp, smear,         std::move(u0),
                   std::move(regular), std::move(log_K), std::move(K), std::move(lap),
                   std::move(grad), std::move(distance),
                   std::move(cells), std::move(warnings), continuum_mean, raw_mean};
}

double u0_residual(const GreenData& data, double min_cells) {
  const double target = -4.0 * kPi * data.degree() / data.lattice.area();
  double worst = 0.0;
  for (std::size_t k = 0; k < data.laplacian_u0.size(); ++k) {
    if (data.vortex_distance[k] > min_cells) {
      worst = std::max(worst, std::abs(data.laplacian_u0[k] - target));
    }
  }
  return worst;
}

}  // namespace cshv
