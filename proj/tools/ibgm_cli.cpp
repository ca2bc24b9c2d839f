// Command line front end: ibgm run|converge|bench --config FILE [options]

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ibgm/errors.hpp"
#include "ibgm/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::array<int, 3> parse_workers(const std::string& s) {
  std::array<int, 3> w{1, 1, 1};
  std::string t = s;
  for (char& c : t)
    if (c == 'x' || c == ',') c = ' ';
  std::istringstream in(t);
  int n = 0;
  for (int v; in >> v;) {
    if (n == 3) throw ibgm::ConfigError("--workers takes at most three factors");
    w[n++] = v;
  }
  if (n == 0 || !in.eof()) throw ibgm::ConfigError("--workers expects PxQ[xR]");
  return w;
}

ibgm::ProblemConfig load(const std::string& path, const std::string& workers, const std::vector<std::string>& sets) {
  ibgm::ProblemConfig cfg = ibgm::load_config(path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ibgm::ConfigError("--set expects key=value");
    ibgm::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!workers.empty()) cfg.workers = parse_workers(workers);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Immersed-boundary solver with pseudo-compressible direction-split fluid"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", workers;
  std::vector<std::string> sets;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key = value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker grid, e.g. 2x2");
    sub->add_option("--set", sets, "override a configuration key (key=value)");
  };

  auto* run = app.add_subcommand("run", "run one configuration");
  common(run);

  std::vector<int> levels;
  int reference_N = 0;
  std::string ref_solver = "bcm";
  auto* conv = app.add_subcommand("converge", "nested-resolution error and rate table");
  common(conv);
  conv->add_option("--levels", levels, "resolutions, each twice the previous (default N, 2N, 4N)");
  conv->add_option("--reference", reference_N, "reference resolution (default 2x finest level)");
  conv->add_option("--reference-solver", ref_solver, "gm or bcm")->check(CLI::IsMember({"gm", "bcm"}));

  int repeats = 3;
  auto* bench = app.add_subcommand("bench", "per-phase timing, best of several runs");
  common(bench);
  bench->add_option("--repeats", repeats, "number of runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const ibgm::ProblemConfig cfg = load(config, workers, sets);
    if (*run) {
      const auto res = ibgm::run_experiment(cfg, out_dir);
      std::printf("%ld steps in %.3f s; outputs in %s\n", res.sim.steps, res.sim.wall_seconds, out_dir.c_str());
      if (!res.sim.entities_conserved)
        std::fprintf(stderr, "warning: Lagrangian entity count changed at step %ld\n", res.sim.first_count_violation);
    } else if (*conv) {
      if (levels.empty()) levels = {cfg.N, 2 * cfg.N, 4 * cfg.N};
      if (reference_N == 0) reference_N = 2 * levels.back();
      const auto st = ibgm::converge(cfg, levels, reference_N,
                                     ref_solver == "gm" ? ibgm::SolverKind::GM : ibgm::SolverKind::BCM);
      ibgm::write_convergence_csv(std::filesystem::path(out_dir) / "convergence.csv", st);
      std::cout << std::ifstream(std::filesystem::path(out_dir) / "convergence.csv").rdbuf();
    } else if (*bench) {
      double wall = 0.0;
      const auto t = ibgm::bench(cfg, repeats, &wall);
      const auto path = std::filesystem::path(out_dir) / "bench.csv";
      ibgm::write_timing_csv(path, t, cfg.resolved_steps());
      std::cout << std::ifstream(path).rdbuf();
      std::printf("best wall time %.6f s\n", wall);
    }
  } catch (const ibgm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ibgm::NumericalError& e) {
    std::fprintf(stderr, "numerical fault: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
