#include "cshv/theta_green.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace cshv {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

Complex as_complex(Vec2 v) { return {v.x, v.y}; }
Vec2 as_vec(Complex z) { return {z.real(), z.imag()}; }

/// log|sin(w) / w|, accurate near w = 0.
double log_abs_sinc(Complex w) {
  if (std::abs(w) < 1e-4) {
    const Complex w2 = w * w;
    return std::log(std::abs(1.0 - w2 / 6.0 + w2 * w2 / 120.0));
  }
  const double s = std::sin(w.real());
  const double sh = std::sinh(w.imag());
  return 0.5 * std::log(s * s + sh * sh) - std::log(std::abs(w));
}

/// cot(w) - 1/w, accurate near w = 0.
Complex cot_minus_inverse(Complex w) {
  if (std::abs(w) < 1e-3) {
    const Complex w2 = w * w;
    return -w / 3.0 - w * w2 / 45.0 - 2.0 * w * w2 * w2 / 945.0;
  }
  return std::cos(w) / std::sin(w) - 1.0 / w;
}

}  // namespace

ThetaGreen::ThetaGreen(Vec2 tau1, Vec2 tau2) {
  const auto [a, b] = reduced_basis(tau1, tau2);
  omega1_ = as_complex(a);
  omega2_ = as_complex(b);
  tau_ = omega2_ / omega1_;

  const double im = tau_.imag();
  const Complex q2 = std::exp(Complex(0.0, 2.0 * kPi) * tau_);
  // Factors q^{2n} e^{+-2iw} are bounded by |q|^{2n} e^{pi Im tau} in the centered cell.
  terms_ = 1;
  while (std::exp(-2.0 * kPi * im * terms_ + kPi * im) > 1e-18 && terms_ < 200) ++terms_;

  log_abs_eta_ = -kPi * im / 12.0;
  Complex qn = q2;
  for (int n = 1; n <= terms_; ++n) {
    log_abs_eta_ += std::log(std::abs(1.0 - qn));
    qn *= q2;
  }

  const double area = std::abs(a.x * b.y - a.y * b.x);
  const double half_height = 0.5 * std::min(area / norm(a), area / norm(b));
  r_inner_ = 0.1 * half_height;
  r_outer_ = 0.9 * half_height;

  const double r1 = r_inner_;
  auto integrand = [this](double r) { return r * std::log(r) * cutoff(r); };
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, r_inner_, r_outer_, 15, 1e-15);
  singular_integral_ = 4.0 * kPi * (0.5 * r1 * r1 * std::log(r1) - 0.25 * r1 * r1 + tail);
}

Complex ThetaGreen::centered_zeta(Vec2 d) const {
  Complex zeta = as_complex(d) / omega1_;
  zeta -= std::round(zeta.imag() / tau_.imag()) * tau_;
  zeta -= std::round(zeta.real());
  return zeta;
}

Vec2 ThetaGreen::centered(Vec2 d) const { return as_vec(centered_zeta(d) * omega1_); }

double ThetaGreen::smooth_value(Complex zeta) const {
  const double im = tau_.imag();
  const Complex w = kPi * zeta;
  const Complex q2 = std::exp(Complex(0.0, 2.0 * kPi) * tau_);
  const Complex e_plus = std::exp(Complex(0.0, 2.0) * w);
  const Complex e_minus = std::exp(Complex(0.0, -2.0) * w);
  double h = std::log(2.0) - kPi * im / 4.0 + std::log(kPi) + log_abs_sinc(w) -
             kPi * zeta.imag() * zeta.imag() / im - log_abs_eta_;
  Complex qn = q2;
  for (int n = 1; n <= terms_; ++n) {
    h += std::log(std::abs(1.0 - qn)) + std::log(std::abs(1.0 - qn * e_plus)) +
         std::log(std::abs(1.0 - qn * e_minus));
    qn *= q2;
  }
  return 2.0 * h - 2.0 * std::log(std::abs(omega1_));
}

double ThetaGreen::value(Vec2 d) const {
  const Complex zeta = centered_zeta(d);
  const double r = std::abs(zeta * omega1_);
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  return 2.0 * std::log(r) + smooth_value(zeta);
}

double ThetaGreen::regular(Vec2 d) const {
  const Complex zeta = centered_zeta(d);
  const double r = std::abs(zeta * omega1_);
  const double smooth = smooth_value(zeta);
  if (r == 0.0) return smooth;
  return smooth + 2.0 * std::log(r) * (1.0 - cutoff(r));
}

Vec2 ThetaGreen::smooth_gradient(Vec2 d) const {
  const Complex zeta = centered_zeta(d);
  const Complex w = kPi * zeta;
  const Complex q2 = std::exp(Complex(0.0, 2.0 * kPi) * tau_);
  const Complex e_plus = std::exp(Complex(0.0, 2.0) * w);
  const Complex e_minus = std::exp(Complex(0.0, -2.0) * w);
  Complex dlog = cot_minus_inverse(w);
  Complex qn = q2;
  const Complex two_i(0.0, 2.0);
  for (int n = 1; n <= terms_; ++n) {
    dlog += -two_i * qn * e_plus / (1.0 - qn * e_plus) + two_i * qn * e_minus / (1.0 - qn * e_minus);
    qn *= q2;
  }
  // d/dz of 2 log theta_1(pi z / omega1) minus the 2/z pole.
  const Complex G = 2.0 * (kPi / omega1_) * dlog;
  const Complex inv = 1.0 / omega1_;
  const double coef = -4.0 * kPi * zeta.imag() / tau_.imag();
  return {G.real() + coef * inv.imag(), -G.imag() + coef * inv.real()};
}

Vec2 ThetaGreen::gradient(Vec2 d) const {
  const Vec2 dc = centered(d);
  const double r2 = dot(dc, dc);
  const Vec2 s = smooth_gradient(d);
  return {s.x + 2.0 * dc.x / r2, s.y + 2.0 * dc.y / r2};
}

ThetaGreen::CutoffDerivs ThetaGreen::cutoff_derivs(double r) const {
  const double width = r_outer_ - r_inner_;
  const double t = (r_outer_ - r) / width;
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  // chi = 1 / (1 + e^phi), phi = 1/t - 1/(1-t).
  const double phi = 1.0 / t - 1.0 / (1.0 - t);
  const double dphi = -1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t));
  const double d2phi = 2.0 / (t * t * t) - 2.0 / ((1.0 - t) * (1.0 - t) * (1.0 - t));
  const double e = std::exp(-std::abs(phi));
  const double sigma = phi > 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  const double s1ms = e / ((1.0 + e) * (1.0 + e));  // sigma (1 - sigma)
  const double ds = -s1ms * dphi;
  const double d2s = -ds * (1.0 - 2.0 * sigma) * dphi - s1ms * d2phi;
  return {sigma, -ds / width, d2s / (width * width)};
}

double ThetaGreen::cutoff(double r) const { return cutoff_derivs(r).chi; }

double ThetaGreen::singular_part(double r) const {
  if (r >= r_outer_) return 0.0;
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  return 2.0 * std::log(r) * cutoff(r);
}

double ThetaGreen::singular_laplacian(double r) const {
  if (r <= r_inner_ || r >= r_outer_) return 0.0;
  const CutoffDerivs c = cutoff_derivs(r);
  return 4.0 * c.d1 / r + 2.0 * std::log(r) * (c.d2 + c.d1 / r);
}

Vec2 ThetaGreen::singular_gradient(Vec2 dc) const {
  const double r = norm(dc);
  if (r >= r_outer_ || r == 0.0) return {0.0, 0.0};
  const CutoffDerivs c = cutoff_derivs(r);
  const double ds = 2.0 * c.chi / r + 2.0 * std::log(r) * c.d1;
  return {ds * dc.x / r, ds * dc.y / r};
}

}  // namespace cshv
