#include "cshv/run.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include "cshv/error.hpp"
#include "cshv/grid_io.hpp"
#include "cshv/observables.hpp"

namespace cshv {

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::vector<double> kBumpWidths = {0.05, 0.1, 0.2};

ScalarGrid random_direction(const TorusLattice& lattice, std::mt19937_64& rng) {
  ScalarGrid d = random_band_limited(lattice, rng);
  d -= d.mean();
  d *= 1.0 / std::sqrt(integrate(d * d));
  return d;
}

std::string metadata(const RunConfig& cfg, const CouplingParams& c, Branch branch) {
  std::ostringstream os;
  os << cfg.describe() << "branch = " << to_string(branch) << "\nlambda = " << format_number(c.lambda) << "\n";
  return os.str();
}

void write_csv(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& rows) {
  std::string body = header + "\n";
  for (const auto& r : rows) body += r + "\n";
  write_file_atomic(path, body);
}

std::vector<BranchSolution> solve_pair(const RunConfig& cfg, const GreenData& green) {
  const SolverParams p = cfg.solver_params(cfg.k);
  if (cfg.threads >= 2) {
    auto minus = std::async(std::launch::async, [&] { return solve_branch(p, green, Branch::minus); });
    BranchSolution plus = solve_branch(p, green, Branch::plus);
    return {std::move(plus), minus.get()};
  }
  return {solve_branch(p, green, Branch::plus), solve_branch(p, green, Branch::minus)};
}

int run_solve(const RunConfig& cfg, const GreenData& green, std::ostream& log) {
  const CouplingParams coupling = CouplingParams::from_k(cfg.k);
  const auto sols = solve_pair(cfg, green);
  std::vector<std::string> diag_rows, report_rows;
  bool ok = true;
  for (const auto& sol : sols) {
    const ContinuationRow row = summarize(sol, green, coupling);
    diag_rows.push_back(row.csv_row());
    report_rows.push_back(sol.report.csv_row());
    ok = ok && sol.converged;
    log << to_string(sol.branch) << ": mass " << format_number(row.mass) << ", residual "
        << format_number(sol.pde_residual_norm) << ", " << (sol.converged ? "converged" : "NOT converged");
    if (!sol.message.empty()) log << " (" << sol.message << ")";
    log << "\n";
    if (cfg.export_fields && sol.report.lambda > 0.0) {
      const FieldSet fields = reconstruct_fields(sol.u, green, coupling);
      export_fields(cfg.out_dir, std::string(to_string(sol.branch)) + "_", fields, sol.u,
                    metadata(cfg, coupling, sol.branch));
    }
  }
  write_csv(cfg.out_dir / "diagnostics.csv", ContinuationRow::csv_header(), diag_rows);
  write_csv(cfg.out_dir / "functionals.csv", FunctionalReport::csv_header(), report_rows);

  const double gap = std::abs(sols[0].mass - sols[1].mass) / sols[0].mass;
  if (ok && !(gap >= 0.5)) {
    log << to_string(ErrorKind::DistinctnessFailed) << ": branch masses differ by only " << format_number(gap)
        << " relative\n";
    ok = false;
  }
  return ok ? kExitOk : kExitSolver;
}

int run_continue(const RunConfig& cfg, const GreenData& green, std::ostream& log) {
  const auto rows = continuation(cfg.k_list, cfg.solver_params(cfg.k_list.front()), green);
  std::vector<std::string> lines;
  bool ok = true;
  for (const auto& r : rows) {
    lines.push_back(r.csv_row());
    ok = ok && r.converged;
    if (!cfg.quiet || !r.converged) {
      log << "k=" << format_number(r.k) << " " << to_string(r.branch) << " mass=" << format_number(r.mass);
      if (!r.converged) log << " NOT converged (residual " << format_number(r.pde_residual) << ")";
      log << "\n";
    }
  }
  write_csv(cfg.out_dir / "continuation.csv", ContinuationRow::csv_header(), lines);
  return ok ? kExitOk : kExitSolver;
}

int run_kc(const RunConfig& cfg, const GreenData& green, std::ostream& log) {
  const KcBracket b = kc_bracket(cfg.solver_params(cfg.kc_lo), green, cfg.kc_lo, cfg.kc_hi, cfg.kc_width);
  write_csv(cfg.out_dir / "kc.csv", "k_lo,k_hi,width,bound,bound_with_margin,within_bound,solves",
            {format_number(b.k_lo) + "," + format_number(b.k_hi) + "," + format_number(b.k_hi - b.k_lo) + "," +
             format_number(b.bound) + "," + format_number(1.05 * b.bound) + "," +
             (b.within_bound ? "true" : "false") + "," + std::to_string(b.solves)});
  log << "k_c bracket [" << format_number(b.k_lo) << ", " << format_number(b.k_hi) << "], bound "
      << format_number(b.bound) << (b.within_bound ? "" : " (EXCEEDED)") << "\n";
  return b.k_lo > 0.0 ? kExitOk : kExitSolver;
}

int run_verify(const RunConfig& cfg, const GreenData& green, std::ostream& log) {
  const auto checks = verify_suite(cfg, green, log);
  std::vector<std::string> lines;
  int failed = 0;
  for (const auto& c : checks) {
    lines.push_back(c.csv_row());
    if (!c.passed) ++failed;
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " " << format_number(c.value) << " (limit "
        << format_number(c.threshold) << ")\n";
  }
  write_csv(cfg.out_dir / "verify.csv", VerifyCheck::csv_header(), lines);
  log << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitSolver;
}

int run_mt_probe(const RunConfig& cfg, std::ostream& log) {
  const auto rows = mt_probe(cfg.lattice(), cfg.seed);
  std::vector<std::string> lines;
  for (const auto& r : rows) lines.push_back(r.csv_row());
  write_csv(cfg.out_dir / "mt_probe.csv", MtProbeRow::csv_header(), lines);
  if (!cfg.quiet) {
    for (const auto& r : rows) log << r.family << " t=" << format_number(r.t) << " deficit=" << format_number(r.deficit) << "\n";
  }
  return kExitOk;
}

}  // namespace

ScalarGrid periodic_bump(const TorusLattice& lattice, Vec2 center, double width) {
  const Vec2 c = lattice.from_lattice_coords(center);
  return ScalarGrid::from_function(lattice, [&](Vec2 x) {
    double s = 0.0;
    for (int a = -2; a <= 2; ++a) {
      for (int b = -2; b <= 2; ++b) {
        const Vec2 d = x - c + static_cast<double>(a) * lattice.tau1() + static_cast<double>(b) * lattice.tau2();
        s += std::exp(-dot(d, d) / (2.0 * width * width));
      }
    }
    return s;
  });
}

std::string MtProbeRow::csv_header() { return "family,t,grid,deficit,shift_defect"; }

std::string MtProbeRow::csv_row() const {
  return family + "," + format_number(t) + "," + std::to_string(grid) + "," + format_number(deficit) + "," +
         format_number(shift_defect);
}

std::vector<double> mt_probe_amplitudes() { return {0.0, 5.0, 10.0, 20.0, 50.0}; }

std::vector<MtProbeRow> mt_probe(const TorusLattice& lattice, std::uint64_t seed,
                                 const std::vector<double>& amplitudes) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec2 center{unit(rng), unit(rng)};
  std::vector<MtProbeRow> rows;
  for (double width : kBumpWidths) {
    const ScalarGrid bump = periodic_bump(lattice, center, width);
    std::ostringstream name;
    name << "bump_w" << width;
    for (double t : amplitudes) {
      const ScalarGrid u = t * bump;
      MtProbeRow row;
      row.family = name.str();
      row.t = t;
      row.grid = lattice.nx();
      row.deficit = mt_deficit(u);
      row.shift_defect = std::abs(mt_deficit(u + 3.7) - row.deficit);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string VerifyCheck::csv_header() { return "check,value,threshold,pass"; }

std::string VerifyCheck::csv_row() const {
  return name + "," + format_number(value) + "," + format_number(threshold) + "," + (passed ? "true" : "false");
}

double gradient_check(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch,
                      std::mt19937_64& rng, int directions, double h) {
  const ScalarGrid g = grad_J(w, green, params, branch);
  double worst = 0.0;
  for (int n = 0; n < directions; ++n) {
    const ScalarGrid d = random_direction(w.lattice(), rng);
    const double jp = J_branch(w + h * d, green, params, branch).J;
    const double jm = J_branch(w - h * d, green, params, branch).J;
    const double fd = (jp - jm) / (2.0 * h);
    const double an = integrate(g * d);
    worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(an), std::abs(fd), 1e-12}));
  }
  return worst;
}

std::vector<VerifyCheck> verify_suite(const RunConfig& cfg, const GreenData& green, std::ostream& log) {
  std::vector<VerifyCheck> out;
  auto add = [&](std::string name, double value, double threshold) {
    out.push_back({std::move(name), value, threshold, std::isfinite(value) && value <= threshold});
  };
  const double area = green.lattice.area();
  const double four_pi_n = 4.0 * kPi * green.degree();
  std::mt19937_64 rng(cfg.seed);

  add("green_mean", std::abs(green.raw_mean) + std::abs(green.continuum_mean), 1e-10);
  add("green_laplacian_rel", u0_residual(green) / (four_pi_n / area), 1e-2);

  const CouplingParams coupling = CouplingParams::from_k(cfg.k);
  const double holder = 4.0 * four_pi_n / (coupling.lambda * area);
  add("holder_equality_rel", std::abs(B_lambda(-green.u0, green, coupling) - holder) / holder, 1e-10);

  for (Branch branch : {Branch::plus, Branch::minus}) {
    const ScalarGrid base = default_start(green, coupling, branch);
    std::uniform_real_distribution<double> amp(0.05, 0.2);
    for (int b = 0; b < 3; ++b) {
      ScalarGrid w = base;
      if (b > 0) w.axpy(amp(rng), random_direction(green.lattice, rng));
      if (!(B_lambda(w, green, coupling) < 1.0)) w = base;
      add(std::string("gradient_fd_") + to_string(branch) + "_" + std::to_string(b),
          gradient_check(w, green, coupling, branch, rng), 1e-5);
    }
  }

  const auto sols = solve_pair(cfg, green);
  for (const auto& sol : sols) {
    const std::string tag = to_string(sol.branch);
    if (!cfg.quiet) log << "verify: solved " << tag << " in " << sol.outer_iters << " + " << sol.newton_iters << " steps\n";
    add("converged_" + tag, sol.converged ? 0.0 : 1.0, 0.0);
    add("pre_polish_residual_" + tag, sol.pre_polish_residual, 1e-6);
    add("pde_residual_" + tag, sol.pde_residual_norm, cfg.tol_pde);
    if (!(sol.report.lambda > 0.0)) continue;
    const Diagnostics d = diagnose(sol.u, green, coupling);
    const double target = 2.0 * four_pi_n / coupling.lambda;
    add("mass_identity_rel_" + tag, std::abs(d.mass * sol.report.D - target) / target, 1e-10);
    add("flux_rel_" + tag, d.flux_err / (0.5 * four_pi_n), 1e-6);
    add("energy_excess_" + tag, d.energy_excess, 1e-6);
    add("energy_rel_" + tag, std::abs(d.energy - 0.5 * four_pi_n) / (0.5 * four_pi_n), 1e-6);
  }

  double mt_shift = 0.0;
  for (const auto& r : mt_probe(green.lattice, cfg.seed)) mt_shift = std::max(mt_shift, r.shift_defect);
  add("mt_shift_invariance", mt_shift, 1e-10);
  return out;
}

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    log << e.what() << "\n";
    return kExitInvalid;
  }
  std::filesystem::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "config.txt", cfg.describe());

  if (cfg.mode == Mode::mt_probe) return run_mt_probe(cfg, log);

  GreenOptions opts;
  opts.snap_to_grid = cfg.snap_to_grid;
  const GreenData green = green_u0(cfg.lattice(), cfg.vortices, cfg.green_method, opts);
  for (const auto& w : green.warnings) log << "warning: " << w << "\n";
  if (cfg.vortices.best_effort()) log << "warning: total vortex degree is not 2; branch results are best effort\n";

  try {
    switch (cfg.mode) {
      case Mode::solve: return run_solve(cfg, green, log);
      case Mode::continuation: return run_continue(cfg, green, log);
      case Mode::kc: return run_kc(cfg, green, log);
      case Mode::verify: return run_verify(cfg, green, log);
      case Mode::mt_probe: break;
    }
  } catch (const Error& e) {
    log << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidArgument ? kExitInvalid : kExitSolver;
  }
  return kExitOk;
}

}  // namespace cshv
