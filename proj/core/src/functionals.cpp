#include "cshv/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cshv/error.hpp"
#include "cshv/grid_io.hpp"

namespace cshv {

namespace {

constexpr double kPi = std::numbers::pi;

double charge(const GreenData& green) { return 4.0 * kPi * green.degree(); }

}  // namespace

const char* to_string(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

Branch parse_branch(const std::string& s) {
  if (s == "plus" || s == "+") return Branch::plus;
  if (s == "minus" || s == "-") return Branch::minus;
  throw Error(ErrorKind::InvalidArgument, "unknown branch '" + s + "'");
}

CouplingParams CouplingParams::from_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorKind::InvalidArgument, "coupling k must be positive");
  return {k, 4.0 / (k * k)};
}

std::string FunctionalReport::csv_header() { return "k,lambda,branch,B,D,J,dirichlet,logmass,feasible"; }

std::string FunctionalReport::csv_row() const {
  return format_number(k) + "," + format_number(lambda) + "," + to_string(branch) + "," + format_number(B) + "," +
         format_number(D) + "," + format_number(J) + "," + format_number(dirichlet) + "," +
         format_number(logmass) + "," + (feasible ? "true" : "false");
}

MassMoments mass_moments(const ScalarGrid& w, const GreenData& green) {
  if (!w.all_finite()) throw Error(ErrorKind::DegenerateMass, "w has non-finite entries");
  ScalarGrid s = green.log_K + w;
  const double top = s.max();
  ScalarGrid e1 = s.map([top](double x) { return std::exp(x - top); });
  ScalarGrid e2 = e1 * e1;
  const double a = integrate(e1);
  const double b = integrate(e2);
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::DegenerateMass, "integral of K e^w vanished");
  e1 *= 1.0 / a;
  e2 *= 1.0 / b;
  return {std::log(a) + top, std::log(b) + 2.0 * top, std::move(e1), std::move(e2)};
}

double B_lambda(const ScalarGrid& w, const GreenData& green, const CouplingParams& params) {
  const MassMoments mm = mass_moments(w, green);
  return 4.0 * charge(green) / params.lambda * std::exp(mm.log_b - 2.0 * mm.log_a);
}

double branch_denominator(double B, Branch branch) {
  if (!(B <= 1.0 + 1e-12)) throw Error(ErrorKind::Infeasible, "B = " + format_number(B) + " exceeds 1");
  const double s = std::sqrt(std::max(0.0, 1.0 - B));
  if (branch == Branch::minus) return 1.0 + s;
  if (B < 1e-300) throw Error(ErrorKind::DegenerateDenominator, "plus-branch denominator underflows");
  return B / (1.0 + s);
}

Evaluation evaluate(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch,
                    bool with_gradient) {
  const double c = charge(green);
  MassMoments mm = mass_moments(w, green);
  const double B = 4.0 * c / params.lambda * std::exp(mm.log_b - 2.0 * mm.log_a);
  const double D = branch_denominator(B, branch);

  FunctionalReport rep;
  rep.k = params.k;
  rep.lambda = params.lambda;
  rep.branch = branch;
  rep.B = B;
  rep.D = D;
  rep.dirichlet = 0.5 * gradient_sq(w);
  rep.logmass = mm.log_a;
  rep.J = rep.dirichlet - c * (mm.log_a + std::log(D) + 1.0 / D);
  rep.feasible = B <= 1.0;

  Evaluation out{rep, std::nullopt};
  if (with_gradient) {
    const double ratio = B / (D * D);
    ScalarGrid g = -laplacian(w);
    g.axpy(-c * (1.0 + ratio), mm.density1);
    g.axpy(c * ratio, mm.density2);
    g += c / w.lattice().area();
    g -= g.mean();
    out.gradient = std::move(g);
  }
  return out;
}

FunctionalReport J_branch(const ScalarGrid& w, const GreenData& green, const CouplingParams& params,
                          Branch branch) {
  return evaluate(w, green, params, branch, false).report;
}

ScalarGrid grad_J(const ScalarGrid& w, const GreenData& green, const CouplingParams& params, Branch branch) {
  return std::move(*evaluate(w, green, params, branch, true).gradient);
}

double I_lambda(const ScalarGrid& u, const GreenData& green, const CouplingParams& params) {
  const ScalarGrid gap = (green.log_K + u).map([](double x) {
    const double p = std::exp(x) - 1.0;
    return p * p;
  });
  return 0.5 * gradient_sq(u) + 0.25 * params.lambda * integrate(gap) +
         charge(green) / u.lattice().area() * integrate(u);
}

double mt_deficit(const ScalarGrid& u) {
  const double top = u.max();
  const double log_mean = top + std::log(u.map([top](double x) { return std::exp(x - top); }).mean());
  return gradient_sq(u) / (16.0 * kPi) + u.mean() - log_mean;
}

}  // namespace cshv
