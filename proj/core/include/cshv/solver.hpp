#ifndef CSHV_SOLVER_HPP
#define CSHV_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cshv/functionals.hpp"
#include "cshv/green_vortex.hpp"

namespace cshv {

struct SolverParams {
  CouplingParams coupling;
  double tol_grad = 1e-8;
  double tol_pde = 1e-10;
  int max_outer = 3000;
  /// Weight of the guard term active for B > 0.9; 0 disables it.
  double barrier_strength = 1e-3;
  std::uint64_t seed = 20240611;
  int lbfgs_memory = 10;
  /// Newton is only attempted below this residual.
  double newton_threshold = 1e-2;
  int max_newton = 25;
  /// Worker cap for independent branch sweeps.
  int threads = 1;

  void validate() const;
};

enum class MinimizeStatus { converged, max_iterations, boundary_trap, stalled };
const char* to_string(MinimizeStatus s);

struct MinimizeResult {
  ScalarGrid w;
  FunctionalReport report;
  double grad_norm = 0.0;
  int iterations = 0;
  MinimizeStatus status = MinimizeStatus::stalled;
  /// Objective value after every accepted step, starting with w_init.
  std::vector<double> history;
};

/// Start used when the caller supplies none: w = 0 for plus, -u0 plus a
/// positive Gaussian bump at the maximum of K for minus. Falls back to the
/// always-feasible -u0 when the preferred start is infeasible.
ScalarGrid default_start(const GreenData& green, const CouplingParams& params, Branch branch);

/// -u0 with vortex cells floored to the smallest off-vortex value, mean-zero.
/// K e^w is 1 away from vortex cells, so B attains its lower bound there.
ScalarGrid flat_density_start(const GreenData& green);

/// Preconditioned L-BFGS on mean-zero fields. Throws NoFeasibleStart when
/// 16 pi N / lambda > 1 or the start lies outside B <= 1.
MinimizeResult minimize_branch(const SolverParams& params, const GreenData& green, Branch branch,
                               const std::optional<ScalarGrid>& w_init = std::nullopt);

/// u = w - log(lambda a / (8 pi N)) - log D with a = int K e^w, so that
/// int K e^u = (8 pi N / lambda) / D.
ScalarGrid recover_u(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch);

/// Lap u - lambda K e^u (K e^u - 1) - 4 pi N / |Sigma|.
ScalarGrid pde_residual(const ScalarGrid& u, const GreenData& green, const CouplingParams& params);

struct NewtonResult {
  ScalarGrid u;
  int iterations = 0;
  double residual = 0.0;
  /// L2 residual before each step and after the last.
  std::vector<double> history;
  int linear_iterations = 0;
  /// Damping failed before reaching tol (only with keep_on_stall).
  bool stalled = false;
};

/// Damped inexact Newton on the PDE residual. Throws NewtonDiverged when the
/// start is outside the threshold or five halvings in a row fail to reduce
/// the residual; with keep_on_stall the latter returns the best iterate
/// marked `stalled` instead.
NewtonResult newton_polish(const ScalarGrid& u, const GreenData& green, const CouplingParams& params,
                           double tol = 1e-10, int max_iterations = 25, double threshold = 1e-2,
                           bool keep_on_stall = false);

struct BranchSolution {
  Branch branch = Branch::plus;
  ScalarGrid w_star;
  ScalarGrid u;
  FunctionalReport report;
  double mass = 0.0;  // int K e^u
  double pre_polish_residual = 0.0;
  double pde_residual_norm = 0.0;
  int outer_iters = 0;
  int newton_iters = 0;
  MinimizeStatus status = MinimizeStatus::stalled;
  bool converged = false;
  std::string message;
};

/// Minimize, recover, polish. Failures are reported in the result.
BranchSolution solve_branch(const SolverParams& params, const GreenData& green, Branch branch,
                            const std::optional<ScalarGrid>& w_init = std::nullopt);

struct BranchPair {
  BranchSolution plus;
  BranchSolution minus;
  /// |mass+ - mass-| / mass+
  double mass_gap = 0.0;
  double sup_difference = 0.0;
  bool distinct = false;
};

/// Both branches at one coupling; `distinct` is false when the masses agree
/// within half of mass+ (DistinctnessFailed is the caller's to raise).
BranchPair solve_both(const SolverParams& params, const GreenData& green);

struct ContinuationRow {
  double k = 0.0;
  Branch branch = Branch::plus;
  double mass = 0.0;
  double flux_err = 0.0;
  double energy_excess = 0.0;
  double B = 0.0;
  double D = 0.0;
  double J = 0.0;
  double pde_residual = 0.0;
  int outer_iters = 0;
  int newton_iters = 0;
  bool converged = false;
  double mean_field_residual = 0.0;  // minus rows only

  static std::string csv_header();
  std::string csv_row() const;
};

/// Diagnostics row of one solved branch (mass and flux left at 0 when the
/// solve never produced a report).
ContinuationRow summarize(const BranchSolution& sol, const GreenData& green, const CouplingParams& coupling);

/// Warm-started sweep over a descending k list. Rows come out ordered by k
/// (descending), plus before minus.
std::vector<ContinuationRow> continuation(const std::vector<double>& k_list, const SolverParams& params,
                                          const GreenData& green);

struct KcBracket {
  double k_lo = 0.0;
  double k_hi = 0.0;
  double bound = 0.0;  // (1/2) sqrt(|Sigma| / (pi N))
  int solves = 0;
  bool within_bound = false;  // k_lo <= 1.05 bound
};

/// Bisection for the largest k at which the plus branch reaches an interior
/// minimizer. The result brackets that threshold with width <= `width`.
KcBracket kc_bracket(const SolverParams& params, const GreenData& green, double k_lo = 0.05, double k_hi = 0.25,
                     double width = 1e-3);

/// || Lap w0 + 4 pi N (K e^{w0} / int K e^{w0} - 1/|Sigma|) ||_2 with
/// w0 = u - mean(u). Throws WrongBranch for plus solutions.
double mean_field_residual(const BranchSolution& sol, const GreenData& green);
double mean_field_residual(const ScalarGrid& u, const GreenData& green);

}  // namespace cshv

#endif  // CSHV_SOLVER_HPP
