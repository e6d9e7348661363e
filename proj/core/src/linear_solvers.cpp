#include "cshv/linear_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cshv {

// Paige-Saunders recurrence, as in the classic SYMMLQ/MINRES codes.
LinearSolveResult minres(const GridOperator& A, const GridOperator& M, const ScalarGrid& b, double rtol,
                         int max_iterations) {
  const TorusLattice& L = b.lattice();
  LinearSolveResult out{ScalarGrid(L), 0, 1.0, false};

  ScalarGrid r1 = b;
  ScalarGrid r2 = b;
  ScalarGrid y = M(r1);
  const double beta1_sq = inner(r1, y);
  if (beta1_sq <= 0.0) {
    out.relative_residual = 0.0;
    out.converged = beta1_sq == 0.0;
    return out;
  }
  const double beta1 = std::sqrt(beta1_sq);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  ScalarGrid w(L), w1(L), w2(L);
  constexpr double tiny = std::numeric_limits<double>::epsilon();

  for (int itn = 1; itn <= max_iterations; ++itn) {
    const ScalarGrid v = (1.0 / beta) * y;
    y = A(v);
    if (itn >= 2) y.axpy(-beta / oldb, r1);
    const double alfa = inner(v, y);
    y.axpy(-alfa / beta, r2);
    r1 = std::move(r2);
    r2 = y;
    y = M(r2);
    oldb = beta;
    const double bsq = inner(r2, y);
    beta = std::sqrt(std::max(bsq, 0.0));

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar *= sn;

    w1 = std::move(w2);
    w2 = std::move(w);
    w = v;
    w.axpy(-oldeps, w1);
    w.axpy(-delta, w2);
    w *= 1.0 / gamma;
    out.x.axpy(phi, w);

    out.iterations = itn;
    out.relative_residual = phibar / beta1;
    if (out.relative_residual <= rtol || beta == 0.0) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace cshv
