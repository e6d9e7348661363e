#include "cshv/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cshv/error.hpp"
#include "cshv/grid_io.hpp"

namespace cshv {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

[[noreturn]] void bad(int line, const std::string& msg) {
  throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) bad(line, "not a number: '" + s + "'");
  return v;
}

long long to_int(const std::string& s, int line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) bad(line, "not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, int line) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  bad(line, "not a boolean: '" + s + "'");
}

Vec2 to_vec(const std::string& s, int line) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) bad(line, "expected two comma-separated numbers");
  return {to_double(parts[0], line), to_double(parts[1], line)};
}

Vortex to_vortex(const std::string& s, int line) {
  const auto parts = split(s, ',');
  if (parts.size() != 2 && parts.size() != 3) bad(line, "vortex needs z1, z2[, m]");
  Vortex v{{to_double(parts[0], line), to_double(parts[1], line)}, 1};
  if (parts.size() == 3) v.multiplicity = static_cast<int>(to_int(parts[2], line));
  return v;
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::continuation: return "continue";
    case Mode::kc: return "kc";
    case Mode::verify: return "verify";
    case Mode::mt_probe: return "mt-probe";
  }
  return "unknown";
}

Mode parse_mode(std::string_view s) {
  if (s == "solve") return Mode::solve;
  if (s == "continue") return Mode::continuation;
  if (s == "kc") return Mode::kc;
  if (s == "verify") return Mode::verify;
  if (s == "mt-probe") return Mode::mt_probe;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + std::string(s) + "'");
}

std::vector<double> default_k_list() { return {0.18, 0.15, 0.12, 0.10, 0.07, 0.05, 0.035, 0.025}; }

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  (void)lattice();  // grid and generator checks
  vortices.validate();
  if (!(k > 0.0) || !std::isfinite(k)) fail("k must be positive");
  if (k_list.empty()) fail("k_list is empty");
  for (std::size_t n = 0; n < k_list.size(); ++n) {
    if (!(k_list[n] > 0.0)) fail("k_list entries must be positive");
    if (n > 0 && !(k_list[n] < k_list[n - 1])) fail("k_list must be strictly descending");
  }
  solver_params(k).validate();
  if (threads < 1) fail("threads must be >= 1");
  if (!(kc_lo > 0.0 && kc_lo < kc_hi)) fail("need 0 < kc_lo < kc_hi");
  if (!(kc_width > 0.0)) fail("kc_width must be positive");
}

SolverParams RunConfig::solver_params(double k_value) const {
  SolverParams p;
  p.coupling = CouplingParams::from_k(k_value);
  p.tol_grad = tol_grad;
  p.tol_pde = tol_pde;
  p.max_outer = max_outer;
  p.barrier_strength = barrier_strength;
  p.newton_threshold = newton_threshold;
  p.seed = seed;
  p.threads = threads;
  return p;
}

std::string RunConfig::describe() const {
  std::ostringstream os;
  os << "mode = " << to_string(mode) << "\n"
     << "tau1 = " << format_number(tau1.x) << ", " << format_number(tau1.y) << "\n"
     << "tau2 = " << format_number(tau2.x) << ", " << format_number(tau2.y) << "\n"
     << "nx = " << nx << "\nny = " << ny << "\n";
  for (const auto& v : vortices.vortices()) {
    os << "vortex = " << format_number(v.z.x) << ", " << format_number(v.z.y) << ", " << v.multiplicity << "\n";
  }
  os << "green = " << to_string(green_method) << "\n"
     << "snap = " << (snap_to_grid ? "true" : "false") << "\n"
     << "k = " << format_number(k) << "\n"
     << "k_list = ";
  for (std::size_t n = 0; n < k_list.size(); ++n) os << (n ? ", " : "") << format_number(k_list[n]);
  os << "\ntol_grad = " << format_number(tol_grad) << "\ntol_pde = " << format_number(tol_pde)
     << "\nmax_outer = " << max_outer << "\nbarrier_strength = " << format_number(barrier_strength)
     << "\nnewton_threshold = " << format_number(newton_threshold) << "\nseed = " << seed << "\n";
  return os.str();
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::vector<Vortex> vortices;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string val = trim(std::string_view(s).substr(eq + 1));

    if (key == "mode") {
      try {
        cfg.mode = parse_mode(val);
      } catch (const Error&) {
        bad(line, "unknown mode '" + val + "'");
      }
    } else if (key == "tau1") {
      cfg.tau1 = to_vec(val, line);
    } else if (key == "tau2") {
      cfg.tau2 = to_vec(val, line);
    } else if (key == "grid") {
      cfg.nx = cfg.ny = static_cast<int>(to_int(val, line));
    } else if (key == "nx") {
      cfg.nx = static_cast<int>(to_int(val, line));
    } else if (key == "ny") {
      cfg.ny = static_cast<int>(to_int(val, line));
    } else if (key == "vortex") {
      vortices.push_back(to_vortex(val, line));
    } else if (key == "vortices") {
      std::string body = val;
      if (body.size() < 2 || body.front() != '[' || body.back() != ']') bad(line, "vortices must be [(...), ...]");
      body = body.substr(1, body.size() - 2);
      std::size_t pos = 0;
      while ((pos = body.find('(', pos)) != std::string::npos) {
        const auto close = body.find(')', pos);
        if (close == std::string::npos) bad(line, "unbalanced parenthesis in vortices");
        vortices.push_back(to_vortex(body.substr(pos + 1, close - pos - 1), line));
        pos = close + 1;
      }
    } else if (key == "green") {
      if (val == "theta") cfg.green_method = GreenMethod::theta;
      else if (val == "smeared") cfg.green_method = GreenMethod::smeared;
      else bad(line, "green must be theta or smeared");
    } else if (key == "snap") {
      cfg.snap_to_grid = to_bool(val, line);
    } else if (key == "k") {
      cfg.k = to_double(val, line);
    } else if (key == "k_list") {
      cfg.k_list.clear();
      for (const auto& part : split(val, ',')) cfg.k_list.push_back(to_double(part, line));
    } else if (key == "tol_grad") {
      cfg.tol_grad = to_double(val, line);
    } else if (key == "tol_pde") {
      cfg.tol_pde = to_double(val, line);
    } else if (key == "max_outer") {
      cfg.max_outer = static_cast<int>(to_int(val, line));
    } else if (key == "barrier_strength") {
      cfg.barrier_strength = to_double(val, line);
    } else if (key == "newton_threshold") {
      cfg.newton_threshold = to_double(val, line);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_int(val, line));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(to_int(val, line));
    } else if (key == "kc_lo") {
      cfg.kc_lo = to_double(val, line);
    } else if (key == "kc_hi") {
      cfg.kc_hi = to_double(val, line);
    } else if (key == "kc_width") {
      cfg.kc_width = to_double(val, line);
    } else if (key == "out") {
      cfg.out_dir = val;
    } else if (key == "export") {
      cfg.export_fields = to_bool(val, line);
    } else {
      bad(line, "unknown key '" + key + "'");
    }
  }
  if (!vortices.empty()) cfg.vortices = VortexConfig(std::move(vortices));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cshv
