#pragma once

/// @file harness.hpp
/// @brief Experiment drivers behind the command line: single runs,
/// nested-resolution convergence studies and per-phase benchmarks.
///
/// Output layout of `run_experiment` under the output directory:
///   diagnostics.csv     see io.hpp for columns
///   timing.csv          phase,seconds (wall time, not deterministic)
///   fibers_initial.txt  fiber layout at t = 0
///   fibers_final.txt    positions at the final step
///   fields/             u<d>_<step>.{bin,hdr}, p_<step>.{bin,hdr} when
///                       dump_fields is set (final step always)
///   fault/              state at the failing step on a numerical fault
///
/// `converge` writes convergence.csv:
///   N,err_u,err_p,err_X,div_l2,rate_u,rate_p,rate_X
/// where err_* are measured against the restricted reference and rate_* at
/// row N uses the rows N, 2N and 4N (empty when not available).
///
/// `bench` writes bench.csv: phase,seconds (min over repeats).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ibgm/diagnostics.hpp"
#include "ibgm/io.hpp"
#include "ibgm/problems.hpp"
#include "ibgm/simulation.hpp"

namespace ibgm {

inline LagrangianLayout lagrangian_layout(const Problem& pb) {
  LagrangianLayout lag;
  lag.weight = pb.lagrangian_weight;
  const ProblemConfig& c = pb.cfg;
  switch (c.problem) {
    case ProblemKind::ThinEllipse:
      lag.ns = c.resolved_Ns();
      break;
    case ProblemKind::ThickShell:
      lag.ns = c.resolved_Ns();
      lag.rings = c.resolved_Nr();
      lag.rule = RingRule::Midpoint;
      break;
    case ProblemKind::MultiEllipse:
      lag.ns = c.resolved_Ns();
      lag.rings = c.resolved_ellipses(0) * c.resolved_ellipses(1);
      break;
    case ProblemKind::Cylinder3D:
      lag.ns = c.resolved_Ns();
      lag.rings = c.resolved_Nr();
      lag.rule = RingRule::Decimate;
      break;
    case ProblemKind::TaylorGreen:
      break;
  }
  return lag;
}

/// Discrete l2 norm of D u for a gathered solution.
inline double divergence_norm(const GlobalFields& gf) {
  const GridSpec& g = gf.grid;
  double acc = 0.0;
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) {
        const std::array<int, 3> c{i, j, k};
        double div = 0.0;
        for (int d = 0; d < g.dim; ++d) {
          std::array<int, 3> n = c;
          n[d] = (n[d] + 1) % g.cells[d];
          div += gf.u[d][detail::dense_index(g, n[0], n[1], n[2])] - gf.u[d][detail::dense_index(g, i, j, k)];
        }
        div /= g.h;
        acc += div * div;
      }
  return std::sqrt(acc * g.cell_volume());
}

struct RunOutputs {
  SimResult sim;
  std::filesystem::path dir;
};

/// Runs one configuration and writes its outputs under `dir` (no files
/// when `dir` is empty).
inline RunOutputs run_experiment(const ProblemConfig& cfg, const std::filesystem::path& dir) {
  const Problem pb = build_problem(cfg);
  SimOptions opt;
  opt.diag_every = cfg.output_every;
  const bool write = !dir.empty();
  if (write) {
    write_fiber_layout(dir / "fibers_initial.txt", pb.grid.dim, pb.points, pb.connections);
    if (cfg.dump_fields && cfg.output_every > 0) {
      opt.snapshot_every = cfg.output_every;
      opt.on_snapshot = [&](const GlobalFields& gf) { write_fields(dir / "fields", std::to_string(gf.step), gf); };
    }
    opt.on_fault = [&](const GlobalFields& gf) {
      write_fields(dir / "fault", std::to_string(gf.step), gf);
      write_fiber_snapshot(dir / "fault" / "fibers.txt", pb, gf);
    };
  }
  RunOutputs out;
  out.dir = dir;
  out.sim = simulate(pb, opt);
  if (write) {
    write_diagnostics_csv(dir / "diagnostics.csv", out.sim.diagnostics);
    write_timing_csv(dir / "timing.csv", out.sim.times, out.sim.steps);
    write_fiber_snapshot(dir / "fibers_final.txt", pb, out.sim.final);
    write_fields(dir / "fields", std::to_string(out.sim.final.step), out.sim.final);
  }
  return out;
}

struct ConvergenceRow {
  int N = 0;
  SolutionError err;
  double div_l2 = 0.0;
  std::optional<double> rate_u, rate_p, rate_X;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  int reference_N = 0;
};

/// Runs `base` at every N in `levels` (ascending, each twice the previous)
/// and at `reference_N` with `reference_solver`, all to the same end time.
inline ConvergenceStudy converge(const ProblemConfig& base, const std::vector<int>& levels, int reference_N,
                                 SolverKind reference_solver = SolverKind::BCM) {
  if (levels.empty()) throw ConfigError("converge needs at least one resolution");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] != 2 * levels[i - 1]) throw ConfigError("convergence levels must double");
  if (reference_N % levels.back() != 0 || ((reference_N / levels.back()) & (reference_N / levels.back() - 1)) != 0)
    throw ConfigError("reference resolution must be a power-of-two multiple of the finest level");
  if (!base.t_end && !base.steps) throw ConfigError("converge needs t_end");

  auto at = [&](int N, SolverKind s) {
    ProblemConfig c = base;
    c.N = N;
    c.solver = s;
    if (s == SolverKind::BCM) c.workers = {1, 1, 1};
    return c;
  };
  std::vector<Problem> problems;
  std::vector<GlobalFields> sols;
  for (int N : levels) {
    problems.push_back(build_problem(at(N, base.solver)));
    sols.push_back(simulate(problems.back()).final);
  }
  const Problem ref_pb = build_problem(at(reference_N, reference_solver));
  const GlobalFields ref = simulate(ref_pb).final;

  ConvergenceStudy st;
  st.reference_N = reference_N;
  std::vector<SolutionError> diffs;  // q_N - I q_2N
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ConvergenceRow row;
    row.N = levels[i];
    const LagrangianLayout lag = lagrangian_layout(problems[i]);
    row.err = compute_error(sols[i], ref, lag);
    row.div_l2 = divergence_norm(sols[i]);
    if (i + 1 < levels.size()) diffs.push_back(compute_error(sols[i], sols[i + 1], lag));
    st.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
    st.rows[i].rate_u = convergence_rate(diffs[i].u, diffs[i + 1].u);
    st.rows[i].rate_p = convergence_rate(diffs[i].p, diffs[i + 1].p);
    st.rows[i].rate_X = convergence_rate(diffs[i].X, diffs[i + 1].X);
  }
  return st;
}

inline void write_convergence_csv(const std::filesystem::path& path, const ConvergenceStudy& st) {
  auto out = detail::open_out(path);
  auto opt = [](const std::optional<double>& v) { return v ? detail::fmt_double(*v) : std::string(); };
  out << "N,err_u,err_p,err_X,div_l2,rate_u,rate_p,rate_X\n";
  for (const auto& r : st.rows)
    out << r.N << ',' << detail::fmt_double(r.err.u) << ',' << detail::fmt_double(r.err.p) << ','
        << detail::fmt_double(r.err.X) << ',' << detail::fmt_double(r.div_l2) << ',' << opt(r.rate_u) << ','
        << opt(r.rate_p) << ',' << opt(r.rate_X) << '\n';
}

/// Runs the configuration `repeats` times and keeps the best time per phase.
inline PhaseTimes bench(const ProblemConfig& cfg, int repeats, double* best_wall = nullptr) {
  if (repeats < 1) throw ConfigError("repeats must be positive");
  const Problem pb = build_problem(cfg);
  SimOptions opt;
  opt.audit_entities = false;
  PhaseTimes best;
  best.seconds.fill(std::numeric_limits<double>::infinity());
  double wall = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const SimResult res = simulate(pb, opt);
    for (std::size_t i = 0; i < kPhaseCount; ++i) best.seconds[i] = std::min(best.seconds[i], res.times.seconds[i]);
    wall = std::min(wall, res.wall_seconds);
  }
  if (best_wall) *best_wall = wall;
  return best;
}

}  // namespace ibgm
