#ifndef CSHV_SPECTRAL_TORUS_HPP
#define CSHV_SPECTRAL_TORUS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace cshv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Flat torus R^2 / (Z tau1 + Z tau2) sampled on an nx-by-ny grid.
///
/// Grid point (i, j) sits at x = (i/nx) tau1 + (j/ny) tau2. Grid counts
/// must be even, at least 16, and factor into 2, 3, 5, 7 only.
class TorusLattice {
 public:
  TorusLattice(Vec2 tau1, Vec2 tau2, int nx, int ny);

  /// Unit square torus (area 1) with an n-by-n grid.
  static TorusLattice unit_square(int n);

  Vec2 tau1() const { return tau1_; }
  Vec2 tau2() const { return tau2_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  double area() const { return area_; }
  /// Dual basis with b_i . tau_j = 2 pi delta_ij.
  Vec2 dual1() const { return b1_; }
  Vec2 dual2() const { return b2_; }
  /// Area of one grid cell.
  double cell_area() const { return area_ / static_cast<double>(size()); }
  /// Smallest grid spacing along the two generators; the "cell size" h.
  double cell_size() const;

  Vec2 point(int i, int j) const;
  Vec2 from_lattice_coords(Vec2 z) const { return z.x * tau1_ + z.y * tau2_; }
  Vec2 to_lattice_coords(Vec2 x) const;
  /// Shortest representative of a displacement modulo the lattice.
  Vec2 min_image(Vec2 d) const;
  /// Radius of the largest disk around a point that does not meet its own
  /// periodic images' half-way boundaries.
  double inscribed_radius() const;
  /// Largest min-image distance from a point (disk of this radius covers the torus).
  double covering_radius() const;

  bool same_grid(const TorusLattice& other) const;

 private:
  Vec2 tau1_, tau2_;
  int nx_, ny_;
  double area_;
  Vec2 b1_, b2_;
};

/// Real field sampled on the periodic grid of a TorusLattice.
/// Storage is row-major: value (i, j) lives at i * ny + j.
class ScalarGrid {
 public:
  explicit ScalarGrid(const TorusLattice& lattice, double fill = 0.0);
  ScalarGrid(const TorusLattice& lattice, std::vector<double> values);

  /// Samples f at every grid point.
  static ScalarGrid from_function(const TorusLattice& lattice,
                                  const std::function<double(Vec2)>& f);

  const TorusLattice& lattice() const { return lattice_; }
  int nx() const { return lattice_.nx(); }
  int ny() const { return lattice_.ny(); }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny()) + static_cast<std::size_t>(j);
  }

  double mean() const;
  double max() const;
  double min() const;
  bool all_finite() const;

  ScalarGrid& operator+=(const ScalarGrid& o);
  ScalarGrid& operator-=(const ScalarGrid& o);
  ScalarGrid& operator*=(const ScalarGrid& o);
  ScalarGrid& operator+=(double c);
  ScalarGrid& operator-=(double c) { return *this += -c; }
  ScalarGrid& operator*=(double c);
  /// this += a * x
  ScalarGrid& axpy(double a, const ScalarGrid& x);

  friend ScalarGrid operator+(ScalarGrid a, const ScalarGrid& b) { return a += b; }
  friend ScalarGrid operator-(ScalarGrid a, const ScalarGrid& b) { return a -= b; }
  friend ScalarGrid operator*(ScalarGrid a, const ScalarGrid& b) { return a *= b; }
  friend ScalarGrid operator*(double c, ScalarGrid a) { return a *= c; }
  friend ScalarGrid operator+(ScalarGrid a, double c) { return a += c; }
  friend ScalarGrid operator-(ScalarGrid a, double c) { return a -= c; }
  ScalarGrid operator-() const { return -1.0 * *this; }

  template <class F>
  ScalarGrid map(F&& f) const {
    ScalarGrid out(lattice_);
    for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] = f(values_[k]);
    return out;
  }

 private:
  TorusLattice lattice_;
  std::vector<double> values_;
};

/// Lagrange-Gauss reduced, positively oriented basis of the lattice:
/// |a| <= |b|, |a.b| <= |a|^2 / 2, det(a, b) > 0.
std::array<Vec2, 2> reduced_basis(Vec2 tau1, Vec2 tau2);

/// Neumaier-compensated sum; the result does not depend on thread count.
double compensated_sum(std::span<const double> xs);

/// k_{mn} = m b1 + n b2. Requires |m| <= nx/2 and |n| <= ny/2.
Vec2 wavevector(int m, int n, const TorusLattice& lattice);

/// Mean-rule quadrature (area / (nx ny)) * sum f, with compensated summation.
double integrate(const ScalarGrid& f);
/// integrate(f * g)
double inner(const ScalarGrid& f, const ScalarGrid& g);
/// sqrt(integrate(f^2))
double l2_norm(const ScalarGrid& f);
/// max |f|
double max_abs(const ScalarGrid& f);

/// Spectral Laplacian: mode (m, n) is multiplied by -|k_mn|^2.
ScalarGrid laplacian(const ScalarGrid& f);
/// Dirichlet energy integral |grad f|^2, evaluated in Fourier space.
double gradient_sq(const ScalarGrid& f);
/// Mean-zero u with laplacian(u) = f - mean(f).
ScalarGrid poisson_solve(const ScalarGrid& f);
/// Solves (sigma - Laplacian) u = f for sigma > 0.
ScalarGrid shifted_inverse(const ScalarGrid& f, double sigma);
/// Cartesian gradient (d/dx, d/dy); Nyquist modes are zeroed.
std::array<ScalarGrid, 2> gradient(const ScalarGrid& f);
/// Random smooth field: Gaussian coefficients on modes |m|, |n| <= max_mode,
/// damped by exp(-(m^2 + n^2) / max_mode^2), scaled to unit L2 norm.
ScalarGrid random_band_limited(const TorusLattice& lattice, std::mt19937_64& rng, int max_mode = 6);
/// Cyclic shift by (di, dj) cells: out(i + di, j + dj) = f(i, j).
ScalarGrid translate(const ScalarGrid& f, int di, int dj);

}  // namespace cshv

#endif  // CSHV_SPECTRAL_TORUS_HPP
