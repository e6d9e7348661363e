#ifndef CSHV_FUNCTIONALS_HPP
#define CSHV_FUNCTIONALS_HPP

#include <optional>
#include <string>

#include "cshv/green_vortex.hpp"
#include "cshv/spectral_torus.hpp"

namespace cshv {

/// plus: D = 1 - sqrt(1 - B) (topological); minus: D = 1 + sqrt(1 - B).
enum class Branch { plus, minus };

const char* to_string(Branch b);
Branch parse_branch(const std::string& s);

struct CouplingParams {
  double k = 0.1;
  double lambda = 400.0;

  /// lambda = 4 / k^2. Throws InvalidArgument unless k > 0 and finite.
  static CouplingParams from_k(double k);
};

struct FunctionalReport {
  double k = 0.0;
  double lambda = 0.0;
  Branch branch = Branch::plus;
  double B = 0.0;
  double D = 0.0;
  double J = 0.0;
  double dirichlet = 0.0;  // (1/2) integral |grad w|^2
  double logmass = 0.0;    // log integral K e^w
  bool feasible = false;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Integrals of K e^w and K^2 e^{2w} in log form, plus the normalized
/// densities K e^w / a and K^2 e^{2w} / b.
struct MassMoments {
  double log_a = 0.0;
  double log_b = 0.0;
  ScalarGrid density1;
  ScalarGrid density2;
};

MassMoments mass_moments(const ScalarGrid& w, const GreenData& green);

/// B = (16 pi N / lambda) int K^2 e^{2w} / (int K e^w)^2. For N = 2 the
/// prefactor is 32 pi / lambda.
double B_lambda(const ScalarGrid& w, const GreenData& green, const CouplingParams& params);

/// D = 1 -+ sqrt(1 - B); the plus branch uses the cancellation-free form
/// B / (1 + sqrt(1 - B)). Throws Infeasible when B > 1 + 1e-12.
double branch_denominator(double B, Branch branch);

struct Evaluation {
  FunctionalReport report;
  std::optional<ScalarGrid> gradient;
};

/// J = (1/2) int |grad w|^2 - 4 pi N (log int K e^w + log D + 1/D) and,
/// when requested, its mean-zero L2 gradient
///   -Lap w - 4 pi N (1 + B/D^2) K e^w / a + 4 pi N (B/D^2) K^2 e^{2w} / b + 4 pi N / |Sigma|.
Evaluation evaluate(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch,
                    bool with_gradient);

FunctionalReport J_branch(const ScalarGrid& w, const GreenData& green, const CouplingParams& params,
                          Branch branch);
ScalarGrid grad_J(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch);

/// (1/2) int |grad u|^2 + (lambda/4) int (K e^u - 1)^2 + (4 pi N / |Sigma|) int u.
double I_lambda(const ScalarGrid& u, const GreenData& green, const CouplingParams& params);

/// (1/16 pi) int |grad u|^2 + mean(u) - log mean(e^u). Equals the
/// integral form on unit-area tori and is shift invariant on any torus.
double mt_deficit(const ScalarGrid& u);

}  // namespace cshv

#endif  // CSHV_FUNCTIONALS_HPP
