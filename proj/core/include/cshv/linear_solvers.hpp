#ifndef CSHV_LINEAR_SOLVERS_HPP
#define CSHV_LINEAR_SOLVERS_HPP

#include <functional>

#include "cshv/spectral_torus.hpp"

namespace cshv {

using GridOperator = std::function<ScalarGrid(const ScalarGrid&)>;

struct LinearSolveResult {
  ScalarGrid x;
  int iterations = 0;
  /// Preconditioned residual norm relative to the right-hand side.
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned MINRES for a symmetric (possibly indefinite) operator A
/// with a symmetric positive definite preconditioner M, starting at x = 0.
/// Inner products are grid integrals.
LinearSolveResult minres(const GridOperator& A, const GridOperator& M, const ScalarGrid& b, double rtol,
                         int max_iterations);

}  // namespace cshv

#endif  // CSHV_LINEAR_SOLVERS_HPP
