#include "cshv/spectral_torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "cshv/error.hpp"

namespace cshv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool small_prime_product(int n) {
  for (int p : {2, 3, 5, 7}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

double det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

}  // namespace

// ---------------------------------------------------------------------------
// TorusLattice

TorusLattice::TorusLattice(Vec2 tau1, Vec2 tau2, int nx, int ny)
    : tau1_(tau1), tau2_(tau2), nx_(nx), ny_(ny) {
  const double d = det(tau1, tau2);
  area_ = std::abs(d);
  if (!(area_ > 1e-12 * norm(tau1) * norm(tau2)) || !std::isfinite(area_)) {
    throw Error(ErrorKind::InvalidArgument, "lattice generators are linearly dependent");
  }
  for (int n : {nx, ny}) {
    if (n < 16 || n % 2 != 0 || !small_prime_product(n)) {
      throw Error(ErrorKind::InvalidArgument,
                  "grid count " + std::to_string(n) +
                      " must be even, >= 16 and a product of 2, 3, 5, 7");
    }
  }
  // b_i . tau_j = 2 pi delta_ij: rows of 2 pi [tau1 tau2]^{-T}.
  b1_ = {kTwoPi * tau2.y / d, -kTwoPi * tau2.x / d};
  b2_ = {-kTwoPi * tau1.y / d, kTwoPi * tau1.x / d};
}

TorusLattice TorusLattice::unit_square(int n) { return TorusLattice({1.0, 0.0}, {0.0, 1.0}, n, n); }

double TorusLattice::cell_size() const {
  return std::min(norm(tau1_) / nx_, norm(tau2_) / ny_);
}

Vec2 TorusLattice::point(int i, int j) const {
  return from_lattice_coords({static_cast<double>(i) / nx_, static_cast<double>(j) / ny_});
}

Vec2 TorusLattice::to_lattice_coords(Vec2 x) const {
  const double d = det(tau1_, tau2_);
  return {det(x, tau2_) / d, det(tau1_, x) / d};
}

Vec2 TorusLattice::min_image(Vec2 d) const {
  Vec2 z = to_lattice_coords(d);
  z.x -= std::round(z.x);
  z.y -= std::round(z.y);
  Vec2 best = from_lattice_coords(z);
  double best_r = norm(best);
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      const Vec2 c = from_lattice_coords({z.x + a, z.y + b});
      const double r = norm(c);
      if (r < best_r) {
        best = c;
        best_r = r;
      }
    }
  }
  return best;
}

double TorusLattice::inscribed_radius() const {
  const auto [a, b] = reduced_basis(tau1_, tau2_);
  (void)b;
  return 0.5 * norm(a);
}

double TorusLattice::covering_radius() const {
  auto [a, b] = reduced_basis(tau1_, tau2_);
  if (dot(a, b) < 0.0) b = -1.0 * b;
  // Triangle (0, a, b) is non-obtuse; its circumcircle bounds the Voronoi cell.
  return norm(a) * norm(b) * norm(a - b) / (2.0 * std::abs(det(a, b)));
}

bool TorusLattice::same_grid(const TorusLattice& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && tau1_ == o.tau1_ && tau2_ == o.tau2_;
}

std::array<Vec2, 2> reduced_basis(Vec2 a, Vec2 b) {
  if (norm(a) > norm(b)) std::swap(a, b);
  for (int it = 0; it < 100; ++it) {
    const double mu = std::round(dot(a, b) / dot(a, a));
    b = b - mu * a;
    if (norm(b) < norm(a)) {
      std::swap(a, b);
    } else {
      break;
    }
  }
  if (det(a, b) < 0.0) b = -1.0 * b;
  return {a, b};
}

// ---------------------------------------------------------------------------
// ScalarGrid

ScalarGrid::ScalarGrid(const TorusLattice& lattice, double fill)
    : lattice_(lattice), values_(lattice.size(), fill) {}

ScalarGrid::ScalarGrid(const TorusLattice& lattice, std::vector<double> values)
    : lattice_(lattice), values_(std::move(values)) {
  if (values_.size() != lattice_.size()) {
    throw Error(ErrorKind::InvalidArgument, "value count does not match the grid");
  }
}

ScalarGrid ScalarGrid::from_function(const TorusLattice& lattice,
                                     const std::function<double(Vec2)>& f) {
  ScalarGrid g(lattice);
  for (int i = 0; i < lattice.nx(); ++i) {
    for (int j = 0; j < lattice.ny(); ++j) g(i, j) = f(lattice.point(i, j));
  }
  return g;
}

double ScalarGrid::mean() const { return compensated_sum(values_) / static_cast<double>(size()); }
double ScalarGrid::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarGrid::min() const { return *std::min_element(values_.begin(), values_.end()); }

bool ScalarGrid::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarGrid& ScalarGrid::operator+=(const ScalarGrid& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}
ScalarGrid& ScalarGrid::operator-=(const ScalarGrid& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}
ScalarGrid& ScalarGrid::operator*=(const ScalarGrid& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= o.values_[k];
  return *this;
}
ScalarGrid& ScalarGrid::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}
ScalarGrid& ScalarGrid::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}
ScalarGrid& ScalarGrid::axpy(double a, const ScalarGrid& x) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * x.values_[k];
  return *this;
}

// ---------------------------------------------------------------------------
// Quadrature

double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double integrate(const ScalarGrid& f) { return f.lattice().cell_area() * compensated_sum(f.values()); }

double inner(const ScalarGrid& f, const ScalarGrid& g) {
  std::vector<double> prod(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) prod[k] = f[k] * g[k];
  return f.lattice().cell_area() * compensated_sum(prod);
}

double l2_norm(const ScalarGrid& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double max_abs(const ScalarGrid& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Fourier machinery

namespace {

using Complex = std::complex<double>;

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW's planner is not thread-safe; execution with new-array functions is.
PlanPair plans_for(int nx, int ny) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({nx, ny});
  if (it != cache.end()) return it->second;

  const std::size_t nreal = static_cast<std::size_t>(nx) * ny;
  const std::size_t ncplx = static_cast<std::size_t>(nx) * (ny / 2 + 1);
  double* in = fftw_alloc_real(nreal);
  fftw_complex* out = fftw_alloc_complex(ncplx);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_2d(nx, ny, in, out, flags);
  p.backward = fftw_plan_dft_c2r_2d(nx, ny, out, in, flags);
  fftw_free(in);
  fftw_free(out);
  cache.emplace(std::make_pair(nx, ny), p);
  return p;
}

/// Half-spectrum coefficients (unnormalized DFT), nx x (ny/2 + 1).
struct Spectrum {
  int nx;
  int ny;
  std::vector<Complex> c;

  int cols() const { return ny / 2 + 1; }
  Complex& at(int a, int b) { return c[static_cast<std::size_t>(a) * cols() + b]; }
};

// The mean is removed before transforming and restored in the zero mode.
// Roundoff in the DFT scales with the data's magnitude, and a large
// constant offset would otherwise leak into the high modes that the
// Laplacian amplifies by |k|^2.
Spectrum forward(const ScalarGrid& f) {
  Spectrum s{f.nx(), f.ny(), std::vector<Complex>(static_cast<std::size_t>(f.nx()) * (f.ny() / 2 + 1))};
  const double mean = f.mean();
  std::vector<double> centered(f.values().begin(), f.values().end());
  for (double& x : centered) x -= mean;
  const PlanPair p = plans_for(f.nx(), f.ny());
  fftw_execute_dft_r2c(p.forward, centered.data(), reinterpret_cast<fftw_complex*>(s.c.data()));
  s.c[0] += mean * static_cast<double>(f.size());
  return s;
}

ScalarGrid backward(Spectrum s, const TorusLattice& lattice) {
  ScalarGrid out(lattice);
  const PlanPair p = plans_for(s.nx, s.ny);
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(s.c.data()), out.values().data());
  out *= 1.0 / static_cast<double>(lattice.size());
  return out;
}

int signed_mode(int a, int n) { return a <= n / 2 ? a : a - n; }

/// |k|^2 for half-spectrum index (a, b). On a Nyquist row or column the
/// cross term m n (b1 . b2) is dropped so the multiplier stays even in
/// the sign of either index and real data maps to real data.
double k_squared(const TorusLattice& L, int a, int b) {
  const int m = signed_mode(a, L.nx());
  const int n = b;
  const bool nyquist = (a == L.nx() / 2) || (b == L.ny() / 2);
  const Vec2 k1 = static_cast<double>(m) * L.dual1();
  const Vec2 k2 = static_cast<double>(n) * L.dual2();
  if (nyquist) return dot(k1, k1) + dot(k2, k2);
  const Vec2 k = k1 + k2;
  return dot(k, k);
}

template <class Mult>
ScalarGrid apply_multiplier(const ScalarGrid& f, Mult&& mult) {
  Spectrum s = forward(f);
  const TorusLattice& L = f.lattice();
  for (int a = 0; a < s.nx; ++a) {
    for (int b = 0; b < s.cols(); ++b) s.at(a, b) *= mult(k_squared(L, a, b), a, b);
  }
  return backward(std::move(s), L);
}

}  // namespace

Vec2 wavevector(int m, int n, const TorusLattice& lattice) {
  if (std::abs(m) > lattice.nx() / 2 || std::abs(n) > lattice.ny() / 2) {
    throw Error(ErrorKind::InvalidArgument, "wavevector index out of range");
  }
  return static_cast<double>(m) * lattice.dual1() + static_cast<double>(n) * lattice.dual2();
}

ScalarGrid laplacian(const ScalarGrid& f) {
  return apply_multiplier(f, [](double k2, int, int) { return Complex(-k2, 0.0); });
}

double gradient_sq(const ScalarGrid& f) {
  Spectrum s = forward(f);
  const TorusLattice& L = f.lattice();
  std::vector<double> terms;
  terms.reserve(s.c.size());
  for (int a = 0; a < s.nx; ++a) {
    for (int b = 0; b < s.cols(); ++b) {
      // Columns 1 .. ny/2-1 stand for themselves and their conjugate partners.
      const double weight = (b == 0 || b == L.ny() / 2) ? 1.0 : 2.0;
      terms.push_back(weight * k_squared(L, a, b) * std::norm(s.at(a, b)));
    }
  }
  const double n = static_cast<double>(L.size());
  return L.area() * compensated_sum(terms) / (n * n);
}

ScalarGrid poisson_solve(const ScalarGrid& f) {
  return apply_multiplier(f, [](double k2, int a, int b) {
    if (a == 0 && b == 0) return Complex(0.0, 0.0);
    return Complex(-1.0 / k2, 0.0);
  });
}

ScalarGrid shifted_inverse(const ScalarGrid& f, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "shift must be positive");
  return apply_multiplier(f, [sigma](double k2, int, int) { return Complex(1.0 / (sigma + k2), 0.0); });
}

std::array<ScalarGrid, 2> gradient(const ScalarGrid& f) {
  const TorusLattice& L = f.lattice();
  const Spectrum base = forward(f);
  std::array<ScalarGrid, 2> out{ScalarGrid(L), ScalarGrid(L)};
  for (int comp = 0; comp < 2; ++comp) {
    Spectrum s = base;
    for (int a = 0; a < s.nx; ++a) {
      for (int b = 0; b < s.cols(); ++b) {
        if (a == L.nx() / 2 || b == L.ny() / 2) {
          s.at(a, b) = 0.0;
          continue;
        }
        const Vec2 k = static_cast<double>(signed_mode(a, L.nx())) * L.dual1() +
                       static_cast<double>(b) * L.dual2();
        s.at(a, b) *= Complex(0.0, comp == 0 ? k.x : k.y);
      }
    }
    out[comp] = backward(std::move(s), L);
  }
  return out;
}

ScalarGrid translate(const ScalarGrid& f, int di, int dj) {
  const int nx = f.nx();
  const int ny = f.ny();
  ScalarGrid out(f.lattice());
  for (int i = 0; i < nx; ++i) {
    const int ii = ((i + di) % nx + nx) % nx;
    for (int j = 0; j < ny; ++j) {
      const int jj = ((j + dj) % ny + ny) % ny;
      out(ii, jj) = f(i, j);
    }
  }
  return out;
}

ScalarGrid random_band_limited(const TorusLattice& lattice, std::mt19937_64& rng, int max_mode) {
  std::normal_distribution<double> normal;
  ScalarGrid out(lattice);
  for (int m = -max_mode; m <= max_mode; ++m) {
    for (int n = 0; n <= max_mode; ++n) {
      if (n == 0 && m <= 0) continue;
      const double damp = std::exp(-static_cast<double>(m * m + n * n) / (max_mode * max_mode));
      const double a = damp * normal(rng);
      const double b = damp * normal(rng);
      for (int i = 0; i < lattice.nx(); ++i) {
        for (int j = 0; j < lattice.ny(); ++j) {
          const double phase = kTwoPi * (static_cast<double>(m) * i / lattice.nx() + static_cast<double>(n) * j / lattice.ny());
          out(i, j) += a * std::cos(phase) + b * std::sin(phase);
        }
      }
    }
  }
  out *= 1.0 / l2_norm(out);
  return out;
}

}  // namespace cshv
