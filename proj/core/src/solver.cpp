#include "cshv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <numbers>

#include "cshv/error.hpp"
#include "cshv/grid_io.hpp"
#include "cshv/linear_solvers.hpp"
#include "cshv/observables.hpp"

namespace cshv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBarrierOnset = 0.9;
constexpr double kHugBand = 1e-4;
constexpr int kHugWindow = 100;

double charge(const GreenData& green) { return 4.0 * kPi * green.degree(); }

struct Objective {
  double f;
  FunctionalReport report;
  ScalarGrid g;
};

// J plus the boundary guard; nullopt outside the feasible set.
std::optional<Objective> objective(const ScalarGrid& w, const GreenData& green, const CouplingParams& cp,
                                   Branch branch, double barrier) {
  std::optional<Evaluation> ev;
  try {
    ev = evaluate(w, green, cp, branch, true);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible || e.kind() == ErrorKind::DegenerateMass ||
        e.kind() == ErrorKind::DegenerateDenominator) {
      return std::nullopt;
    }
    throw;
  }
  const double B = ev->report.B;
  if (B > 1.0) return std::nullopt;
  Objective out{ev->report.J, ev->report, std::move(*ev->gradient)};
  if (barrier > 0.0 && B > kBarrierOnset) {
    if (B >= 1.0) return std::nullopt;
    // -beta [log((1 - B) / 0.1) + (B - 0.9) / 0.1]: zero value and slope at the onset.
    const double span = 1.0 - kBarrierOnset;
    out.f += -barrier * (std::log((1.0 - B) / span) + (B - kBarrierOnset) / span);
    const double slope = barrier * (1.0 / (1.0 - B) - 1.0 / span);
    const MassMoments mm = mass_moments(w, green);
    ScalarGrid dB = 2.0 * B * (mm.density2 - mm.density1);
    out.g.axpy(slope, dB);
    out.g -= out.g.mean();
  }
  return out;
}

ScalarGrid precondition(const ScalarGrid& q, double sigma) {
  ScalarGrid r = shifted_inverse(q, sigma);
  r -= r.mean();
  return r;
}

// Shift for (sigma - Lap)^-1: the mean curvature of the reaction term at the
// recovered u, so that the preconditioner tracks the Hessian's zero mode.
double preconditioner_shift(const ScalarGrid& w, const GreenData& green, const CouplingParams& cp, Branch branch) {
  try {
    const ScalarGrid u = recover_u(w, green, cp, branch);
    const ScalarGrid c = (green.log_K + u).map([&](double x) {
      const double p = std::exp(x);
      return std::max(0.0, cp.lambda * (2.0 * p * p - p));
    });
    return std::max(1.0, c.mean());
  } catch (const Error&) {
    return 1.0;
  }
}

}  // namespace

void SolverParams::validate() const {
  if (!(coupling.k > 0.0) || std::abs(coupling.lambda * coupling.k * coupling.k - 4.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "coupling must satisfy k > 0 and lambda k^2 = 4");
  }
  if (!(tol_grad > 0.0) || !(tol_pde > 0.0) || tol_pde > tol_grad) {
    throw Error(ErrorKind::InvalidArgument, "tolerances must satisfy 0 < tol_pde <= tol_grad");
  }
  if (max_outer < 1 || lbfgs_memory < 1 || max_newton < 0) {
    throw Error(ErrorKind::InvalidArgument, "iteration limits must be positive");
  }
  if (!(barrier_strength >= 0.0)) throw Error(ErrorKind::InvalidArgument, "barrier_strength must be >= 0");
  if (!(newton_threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "newton_threshold must be positive");
}

const char* to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::converged: return "converged";
    case MinimizeStatus::max_iterations: return "max_iterations";
    case MinimizeStatus::boundary_trap: return "boundary_trap";
    case MinimizeStatus::stalled: return "stalled";
  }
  return "unknown";
}

ScalarGrid flat_density_start(const GreenData& green) {
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < green.u0.size(); ++n) {
    if (green.vortex_distance[n] > 0.5) floor = std::min(floor, green.u0[n]);
  }
  ScalarGrid w = green.u0.map([floor](double x) { return -std::max(x, floor); });
  w -= w.mean();
  return w;
}

ScalarGrid default_start(const GreenData& green, const CouplingParams& params, Branch branch) {
  const TorusLattice& L = green.lattice;
  if (branch == Branch::plus) {
    ScalarGrid w(L);
    if (B_lambda(w, green, params) <= 1.0) return w;
    return flat_density_start(green);
  }
  // Concentrated bump at the maximum of K: amplitude 4, width 0.1 diam.
  std::size_t top = 0;
  for (std::size_t n = 1; n < green.K.size(); ++n) {
    if (green.K[n] > green.K[top]) top = n;
  }
  const Vec2 c = L.point(static_cast<int>(top / L.ny()), static_cast<int>(top % L.ny()));
  const double width = 0.1 * 2.0 * L.covering_radius();
  ScalarGrid w = flat_density_start(green);
  for (int i = 0; i < L.nx(); ++i) {
    for (int j = 0; j < L.ny(); ++j) {
      const Vec2 d = L.min_image(L.point(i, j) - c);
      w(i, j) += 4.0 * std::exp(-dot(d, d) / (2.0 * width * width));
    }
  }
  w -= w.mean();
  if (B_lambda(w, green, params) <= 1.0) return w;
  return flat_density_start(green);
}

MinimizeResult minimize_branch(const SolverParams& params, const GreenData& green, Branch branch,
                               const std::optional<ScalarGrid>& w_init) {
  params.validate();
  const CouplingParams& cp = params.coupling;
  const double floor_B = 4.0 * charge(green) / cp.lambda;
  if (floor_B > 1.0) {
    throw Error(ErrorKind::NoFeasibleStart,
                "B >= 16 pi N / lambda = " + format_number(floor_B) + " > 1 for every w at k = " + format_number(cp.k));
  }
  ScalarGrid w = w_init ? *w_init : default_start(green, cp, branch);
  w -= w.mean();
  auto current = objective(w, green, cp, branch, params.barrier_strength);
  if (!current) throw Error(ErrorKind::NoFeasibleStart, "initial w lies outside B <= 1");

  const double sigma = preconditioner_shift(w, green, cp, branch);
  MinimizeResult res{w, current->report, 0.0, 0, MinimizeStatus::max_iterations, {current->f}};

  // One L-BFGS run from the current point; iteration count is shared.
  auto descend = [&](double barrier) {
    current = objective(w, green, cp, branch, barrier);
    if (res.history.back() != current->f) res.history.push_back(current->f);
    std::deque<std::pair<ScalarGrid, ScalarGrid>> pairs;
    // Windows of iterations spent hugging B = 1; no gradient progress across
    // one of them means the infimum sits on the boundary.
    int hugging = 0;
    double window_gnorm = 0.0;
    while (res.iterations < params.max_outer) {
      const ScalarGrid& g = current->g;
      const double gnorm = l2_norm(g);
      res.grad_norm = gnorm;
      if (gnorm <= params.tol_grad) return MinimizeStatus::converged;
      if (current->report.B > 1.0 - kHugBand) {
        if (hugging == 0) window_gnorm = gnorm;
        if (++hugging >= kHugWindow) {
          if (gnorm > 0.1 * window_gnorm) return MinimizeStatus::boundary_trap;
          hugging = 0;
        }
      } else {
        hugging = 0;
      }

      // Two-loop recursion with the spectral preconditioner as H0.
      ScalarGrid q = g;
      std::vector<double> alphas;
      for (auto p = pairs.rbegin(); p != pairs.rend(); ++p) {
        const double a = inner(p->first, q) / inner(p->second, p->first);
        alphas.push_back(a);
        q.axpy(-a, p->second);
      }
      ScalarGrid r = precondition(q, sigma);
      if (!pairs.empty()) {
        const auto& [s, y] = pairs.back();
        r *= inner(s, y) / inner(y, precondition(y, sigma));
      }
      std::size_t idx = alphas.size();
      for (const auto& [s, y] : pairs) {
        const double b = inner(y, r) / inner(y, s);
        r.axpy(alphas[--idx] - b, s);
      }
      ScalarGrid d = -r;
      d -= d.mean();
      double slope = inner(d, g);
      if (!(slope < 0.0)) {
        pairs.clear();
        d = -precondition(g, sigma);
        slope = inner(d, g);
      }

      double t = 1.0;
      std::optional<Objective> next;
      ScalarGrid trial(w.lattice());
      bool accepted = false;
      for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
        trial = w;
        trial.axpy(t, d);
        next = objective(trial, green, cp, branch, barrier);
        if (!next) continue;
        const bool armijo = next->f <= current->f + 1e-4 * t * slope;
        // Near convergence J is flat to roundoff; accept any step that keeps J
        // within that noise and shrinks the gradient.
        const bool flat = next->f <= current->f + 1e-13 * std::abs(current->f) && l2_norm(next->g) < gnorm;
        accepted = armijo || flat;
      }
      if (!accepted) {
        return current->report.B > 1.0 - 1e-6 ? MinimizeStatus::boundary_trap : MinimizeStatus::stalled;
      }

      ScalarGrid s = trial - w;
      ScalarGrid y = next->g - current->g;
      if (inner(s, y) > 1e-16 * l2_norm(s) * l2_norm(y)) {
        pairs.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(pairs.size()) > params.lbfgs_memory) pairs.pop_front();
      }
      w = std::move(trial);
      current = std::move(next);
      res.history.push_back(current->f);
      ++res.iterations;
    }
    res.grad_norm = l2_norm(current->g);
    return MinimizeStatus::max_iterations;
  };

  res.status = descend(params.barrier_strength);
  // The guard only shapes the path: finish on J itself if it is still active.
  if (res.status == MinimizeStatus::converged && params.barrier_strength > 0.0 &&
      current->report.B > kBarrierOnset) {
    res.status = descend(0.0);
  }
  if (res.status == MinimizeStatus::converged && current->report.B > 1.0 - 1e-9) {
    res.status = MinimizeStatus::boundary_trap;
  }
  res.w = std::move(w);
  res.report = current->report;
  return res;
}

ScalarGrid recover_u(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch) {
  const MassMoments mm = mass_moments(w, green);
  const double c = charge(green);
  const double B = 4.0 * c / params.lambda * std::exp(mm.log_b - 2.0 * mm.log_a);
  const double D = branch_denominator(B, branch);
  return w - (std::log(params.lambda / (2.0 * c)) + mm.log_a + std::log(D));
}

ScalarGrid pde_residual(const ScalarGrid& u, const GreenData& green, const CouplingParams& params) {
  ScalarGrid r = laplacian(u);
  const double lam = params.lambda;
  const double source = charge(green) / u.lattice().area();
  for (std::size_t n = 0; n < r.size(); ++n) {
    const double p = std::exp(green.log_K[n] + u[n]);
    r[n] -= lam * p * (p - 1.0) + source;
  }
  return r;
}

NewtonResult newton_polish(const ScalarGrid& u_in, const GreenData& green, const CouplingParams& params, double tol,
                           int max_iterations, double threshold, bool keep_on_stall) {
  NewtonResult out{u_in, 0, 0.0, {}, 0, false};
  ScalarGrid r = pde_residual(out.u, green, params);
  double rn = l2_norm(r);
  out.history.push_back(rn);
  if (!(rn <= threshold)) {
    throw Error(ErrorKind::NewtonDiverged,
                "residual " + format_number(rn) + " is outside the Newton threshold " + format_number(threshold));
  }
  const double lam = params.lambda;
  while (rn > tol && out.iterations < max_iterations) {
    // (c - Lap) delta = r with c = lambda (2P^2 - P); then u + delta zeroes the linearized residual.
    const ScalarGrid c = (green.log_K + out.u).map([lam](double x) {
      const double p = std::exp(x);
      return lam * (2.0 * p * p - p);
    });
    const double sigma = std::max(1.0, c.map([](double x) { return std::max(x, 0.0); }).mean());
    const GridOperator op = [&c](const ScalarGrid& x) { return c * x - laplacian(x); };
    const GridOperator prec = [sigma](const ScalarGrid& x) { return shifted_inverse(x, sigma); };
    const LinearSolveResult lin = minres(op, prec, r, std::min(1e-3, std::max(rn, 1e-10)), 500);
    out.linear_iterations += lin.iterations;

    double t = 1.0;
    int halvings = 0;
    for (;;) {
      ScalarGrid trial = out.u;
      trial.axpy(t, lin.x);
      ScalarGrid rt = pde_residual(trial, green, params);
      const double rtn = l2_norm(rt);
      if (std::isfinite(rtn) && rtn < rn * (1.0 - 1e-4 * t)) {
        out.u = std::move(trial);
        r = std::move(rt);
        rn = rtn;
        break;
      }
      if (++halvings >= 5) {
        if (keep_on_stall) {
          out.stalled = true;
          break;
        }
        throw Error(ErrorKind::NewtonDiverged, "residual " + format_number(rn) + " did not shrink after " +
                                                   std::to_string(halvings) + " damped attempts");
      }
      t *= 0.5;
    }
    if (out.stalled) break;
    ++out.iterations;
    out.history.push_back(rn);
  }
  out.residual = rn;
  return out;
}

BranchSolution solve_branch(const SolverParams& params, const GreenData& green, Branch branch,
                            const std::optional<ScalarGrid>& w_init) {
  const TorusLattice& L = green.lattice;
  BranchSolution sol{branch, ScalarGrid(L), ScalarGrid(L), {}, 0.0, 0.0, 0.0, 0, 0, MinimizeStatus::stalled, false, ""};
  std::optional<MinimizeResult> mr;
  try {
    mr = minimize_branch(params, green, branch, w_init);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoFeasibleStart || !w_init) {
      sol.message = e.what();
      return sol;
    }
  }
  if (!mr) {
    try {
      mr = minimize_branch(params, green, branch, std::nullopt);
    } catch (const Error& e) {
      sol.message = e.what();
      return sol;
    }
  }
  sol.w_star = mr->w;
  sol.report = mr->report;
  sol.outer_iters = mr->iterations;
  sol.status = mr->status;
  sol.u = recover_u(mr->w, green, params.coupling, branch);
  sol.pre_polish_residual = l2_norm(pde_residual(sol.u, green, params.coupling));
  sol.pde_residual_norm = sol.pre_polish_residual;
  if (mr->status != MinimizeStatus::converged) sol.message = std::string("minimizer ") + to_string(mr->status);
  try {
    NewtonResult nr = newton_polish(sol.u, green, params.coupling, params.tol_pde, params.max_newton,
                                    params.newton_threshold, true);
    sol.u = std::move(nr.u);
    sol.newton_iters = nr.iterations;
    sol.pde_residual_norm = nr.residual;
    if (nr.stalled) {
      if (!sol.message.empty()) sol.message += "; ";
      sol.message += "Newton stalled at residual " + format_number(nr.residual);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NewtonDiverged) throw;
    if (!sol.message.empty()) sol.message += "; ";
    sol.message += e.what();
  }
  sol.mass = integrate((green.log_K + sol.u).map([](double x) { return std::exp(x); }));
  sol.converged = mr->status == MinimizeStatus::converged && sol.report.feasible &&
                  sol.pde_residual_norm <= params.tol_pde;
  return sol;
}

BranchPair solve_both(const SolverParams& params, const GreenData& green) {
  BranchPair pair{solve_branch(params, green, Branch::plus), solve_branch(params, green, Branch::minus)};
  pair.mass_gap = std::abs(pair.plus.mass - pair.minus.mass) / pair.plus.mass;
  pair.sup_difference = max_abs(pair.plus.u - pair.minus.u);
  pair.distinct = pair.mass_gap >= 0.5;
  return pair;
}

std::string ContinuationRow::csv_header() {
  return "k,branch,mass,flux_err,energy_excess,B,D,J,pde_residual,outer_iters,newton_iters,converged";
}

std::string ContinuationRow::csv_row() const {
  return format_number(k) + "," + to_string(branch) + "," + format_number(mass) + "," + format_number(flux_err) +
         "," + format_number(energy_excess) + "," + format_number(B) + "," + format_number(D) + "," +
         format_number(J) + "," + format_number(pde_residual) + "," + std::to_string(outer_iters) + "," +
         std::to_string(newton_iters) + "," + (converged ? "true" : "false");
}

ContinuationRow summarize(const BranchSolution& sol, const GreenData& green, const CouplingParams& coupling) {
  ContinuationRow row;
  row.k = coupling.k;
  row.branch = sol.branch;
  row.B = sol.report.B;
  row.D = sol.report.D;
  row.J = sol.report.J;
  row.pde_residual = sol.pde_residual_norm;
  row.outer_iters = sol.outer_iters;
  row.newton_iters = sol.newton_iters;
  row.converged = sol.converged;
  if (sol.report.lambda > 0.0) {
    const Diagnostics d = diagnose(sol.u, green, coupling);
    row.mass = d.mass;
    row.flux_err = d.flux_err;
    row.energy_excess = d.energy_excess;
    if (sol.branch == Branch::minus) row.mean_field_residual = mean_field_residual(sol.u, green);
  }
  return row;
}

std::vector<ContinuationRow> continuation(const std::vector<double>& k_list, const SolverParams& params,
                                          const GreenData& green) {
  for (std::size_t n = 0; n < k_list.size(); ++n) {
    if (!(k_list[n] > 0.0) || (n > 0 && !(k_list[n] < k_list[n - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "continuation k list must be positive and strictly descending");
    }
  }
  auto sweep = [&](Branch branch) {
    std::vector<ContinuationRow> rows;
    std::optional<ScalarGrid> warm;
    for (double k : k_list) {
      SolverParams p = params;
      p.coupling = CouplingParams::from_k(k);
      const BranchSolution sol = solve_branch(p, green, branch, warm);
      if (sol.status == MinimizeStatus::converged) warm = sol.w_star;
      rows.push_back(summarize(sol, green, p.coupling));
    }
    return rows;
  };

  std::vector<ContinuationRow> plus_rows, minus_rows;
  if (params.threads >= 2) {
    auto fut = std::async(std::launch::async, sweep, Branch::minus);
    plus_rows = sweep(Branch::plus);
    minus_rows = fut.get();
  } else {
    plus_rows = sweep(Branch::plus);
    minus_rows = sweep(Branch::minus);
  }
  std::vector<ContinuationRow> rows;
  for (std::size_t n = 0; n < k_list.size(); ++n) {
    rows.push_back(plus_rows[n]);
    rows.push_back(minus_rows[n]);
  }
  return rows;
}

KcBracket kc_bracket(const SolverParams& params, const GreenData& green, double k_lo, double k_hi, double width) {
  KcBracket out;
  out.bound = 0.5 * std::sqrt(green.lattice.area() / (kPi * green.degree()));

  auto interior = [&](double k, const std::optional<ScalarGrid>& warm) -> std::optional<ScalarGrid> {
    SolverParams p = params;
    p.coupling = CouplingParams::from_k(k);
    ++out.solves;
    for (const auto& start : {warm, std::optional<ScalarGrid>{}}) {
      try {
        const MinimizeResult mr = minimize_branch(p, green, Branch::plus, start);
        if (mr.status == MinimizeStatus::converged && mr.report.B < 1.0 - 1e-9) return mr.w;
        return std::nullopt;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoFeasibleStart) throw;
        if (!start) return std::nullopt;
      }
    }
    return std::nullopt;
  };

  std::optional<ScalarGrid> warm = interior(k_lo, std::nullopt);
  if (!warm) {
    out.k_lo = 0.0;
    out.k_hi = k_lo;
  } else if (interior(k_hi, warm)) {
    out.k_lo = out.k_hi = k_hi;
  } else {
    double lo = k_lo, hi = k_hi;
    while (hi - lo > width) {
      const double mid = 0.5 * (lo + hi);
      if (auto w = interior(mid, warm)) {
        lo = mid;
        warm = std::move(w);
      } else {
        hi = mid;
      }
    }
    out.k_lo = lo;
    out.k_hi = hi;
  }
  out.within_bound = out.k_lo <= 1.05 * out.bound;
  return out;
}

double mean_field_residual(const ScalarGrid& u, const GreenData& green) {
  const ScalarGrid w0 = u - u.mean();
  const MassMoments mm = mass_moments(w0, green);
  ScalarGrid res = laplacian(w0);
  const double c = charge(green);
  res.axpy(c, mm.density1);
  res -= c / u.lattice().area();
  return l2_norm(res);
}

double mean_field_residual(const BranchSolution& sol, const GreenData& green) {
  if (sol.branch != Branch::minus) {
    throw Error(ErrorKind::WrongBranch, "the mean field diagnostic applies to minus-branch solutions");
  }
  return mean_field_residual(sol.u, green);
}

}  // namespace cshv
