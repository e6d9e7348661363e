// Batch front-end: csh_vortex --config run.cfg [--mode M] [--out DIR] ...

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cshv/error.hpp"
#include "cshv/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Self-dual Chern-Simons vortex solver on a flat torus"};
  std::string config_path, mode, out;
  std::optional<int> grid;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "key = value run configuration")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "solve | continue | kc | verify | mt-probe (overrides the config)");
  app.add_option("--out", out, "output directory");
  app.add_option("--grid", grid, "grid points per direction");
  app.add_option("--seed", seed, "seed for every random choice");
  app.add_flag("--quiet", quiet, "only report failures");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cshv::kExitOk : cshv::kExitInvalid;
  }

  cshv::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = cshv::load_config(config_path);
    if (!mode.empty()) cfg.mode = cshv::parse_mode(mode);
    if (!out.empty()) cfg.out_dir = out;
    if (grid) cfg.nx = cfg.ny = *grid;
    if (seed) cfg.seed = *seed;
    cfg.quiet = quiet;
    if (const char* env = std::getenv("CSH_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1) cfg.threads = std::min(cfg.threads, cap);
    }
  } catch (const cshv::Error& e) {
    std::cerr << e.what() << "\n";
    return cshv::kExitInvalid;
  }

  std::ostringstream sink;
  std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cout;
  const int code = cshv::run(cfg, log);
  if (quiet && code != cshv::kExitOk) std::cerr << sink.str();
  return code;
}
