#ifndef CSHV_THETA_GREEN_HPP
#define CSHV_THETA_GREEN_HPP

#include <complex>

#include "cshv/spectral_torus.hpp"

namespace cshv {

/// Mean-zero periodic Green kernel g of a flat torus:
///
///   Laplacian g = 4 pi delta_0 - 4 pi / |Sigma|,   integral of g = 0,
///
/// so g(x) = 2 log|x| + smooth near the origin. Built from the first Jacobi
/// theta function of the (Gauss-reduced) lattice,
///
///   g = 2 log|theta_1(pi zeta | tau)| - 2 pi (Im zeta)^2 / Im tau - 2 log|eta(tau)|,
///
/// with zeta = x / omega1 and tau = omega2 / omega1. The eta term is the exact
/// torus average of the first two terms.
///
/// A radial cutoff chi (1 for r <= r_inner, 0 for r >= r_outer, C-infinity in
/// between) splits g into a smooth periodic remainder and the compactly
/// supported singular part S(r) = 2 log(r) chi(r), whose Laplacian, gradient
/// and integral are known in closed form. Spectral operators are applied to
/// the remainder only.
class ThetaGreen {
 public:
  ThetaGreen(Vec2 tau1, Vec2 tau2);

  /// g at displacement d; -infinity at lattice points.
  double value(Vec2 d) const;
  /// g(d) - S(|d_c|) with d_c the centered image of d; finite everywhere.
  double regular(Vec2 d) const;
  /// Analytic gradient of g (singular at lattice points).
  Vec2 gradient(Vec2 d) const;
  /// Gradient of g(d) - 2 log|d_c|; zero at the lattice points.
  Vec2 smooth_gradient(Vec2 d) const;

  /// Centered image of a displacement (|s|, |t| <= 1/2 in the reduced basis).
  Vec2 centered(Vec2 d) const;

  double cutoff(double r) const;
  double singular_part(double r) const;
  double singular_laplacian(double r) const;
  Vec2 singular_gradient(Vec2 d_centered) const;
  /// Integral over the plane of S(r) = 2 log(r) chi(r).
  double singular_integral() const { return singular_integral_; }

  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }
  double log_abs_eta() const { return log_abs_eta_; }
  std::complex<double> tau() const { return tau_; }

 private:
  struct CutoffDerivs {
    double chi, d1, d2;
  };
  CutoffDerivs cutoff_derivs(double r) const;
  /// Complex zeta in the centered cell.
  std::complex<double> centered_zeta(Vec2 d) const;
  /// g - 2 log|d_c| as a function of centered zeta.
  double smooth_value(std::complex<double> zeta) const;

  std::complex<double> omega1_, omega2_, tau_;
  double log_abs_eta_ = 0.0;
  double r_inner_ = 0.0;
  double r_outer_ = 0.0;
  double singular_integral_ = 0.0;
  int terms_ = 0;
};

}  // namespace cshv

#endif  // CSHV_THETA_GREEN_HPP
