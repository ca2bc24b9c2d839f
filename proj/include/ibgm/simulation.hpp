#pragma once

/// @file simulation.hpp
/// @brief The coupled timestep loop over a worker group.
///
/// Per step and per worker:
///   interpolate U at X^n  -> evolve X^{n+1}, X^{n+1/2}  -> migrate ghosts
///   -> force density and spreading at X^{n+1/2} -> cleanup / ownership
///   -> fluid step (pseudo-compressible or projection).
/// Diagnostics and snapshots are gathered to rank 0.

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ibgm/comm.hpp"
#include "ibgm/diagnostics.hpp"
#include "ibgm/errors.hpp"
#include "ibgm/gm_fluid.hpp"
#include "ibgm/ib_structure.hpp"
#include "ibgm/migration.hpp"
#include "ibgm/partition.hpp"
#include "ibgm/problems.hpp"
#include "ibgm/projection.hpp"
#include "ibgm/timing.hpp"

namespace ibgm {

struct DiagnosticsRecord {
  long step = 0;
  double time = 0.0;
  double max_radius = 0.0;
  double mean_radius = 0.0;
  double area = 0.0;
  double div_norm = 0.0;
  double kinetic_energy = 0.0;
};

struct SimOptions {
  std::optional<long> steps;  // overrides the config
  long diag_every = 0;        // 0: initial and final only
  long snapshot_every = 0;    // 0: final snapshot only
  bool audit_entities = true;
  bool timing = true;
  /// Called on rank 0 after each snapshot is assembled.
  std::function<void(const GlobalFields&)> on_snapshot;
  /// Called on rank 0 with the faulty state before a NumericalError.
  std::function<void(const GlobalFields&)> on_fault;
};

struct SimResult {
  GlobalFields final;
  std::vector<GlobalFields> snapshots;
  std::vector<DiagnosticsRecord> diagnostics;
  PhaseTimes times;  // per phase, max over workers
  double wall_seconds = 0.0;
  long steps = 0;
  EntityCounts initial_counts;
  bool entities_conserved = true;
  long first_count_violation = -1;
};

namespace detail {

inline void init_velocity(const Problem& pb, MacField& u) {
  const GridSpec& g = pb.grid;
  for (int d = 0; d < u.dim; ++d) {
    Field& f = u[d];
    const Stagger loc = f.location();
    f.for_each_interior([&](int i, int j, int k) {
      const std::array<int, 3> gi{f.box().lo[0] + i, f.box().lo[1] + j, f.box().lo[2] + k};
      Vec3 x{};
      for (int a = 0; a < g.dim; ++a) x[a] = g.coord(loc, a, gi[a]);
      f(i, j, k) = pb.u0(d, x);
    });
  }
}

inline void put_field(Writer& w, const Field& f) {
  f.for_each_interior([&](int i, int j, int k) { w.put(f(i, j, k)); });
}

inline void get_field(Reader& r, const Box& b, const GridSpec& g, std::vector<double>& dst) {
  for (int k = 0; k < b.n[2]; ++k)
    for (int j = 0; j < b.n[1]; ++j)
      for (int i = 0; i < b.n[0]; ++i)
        dst[dense_index(g, b.lo[0] + i, b.lo[1] + j, b.lo[2] + k)] = r.get<double>();
}

/// Collects the whole-grid solution on rank 0 (empty result elsewhere).
inline std::optional<GlobalFields> gather_fields(Comm& comm, const Partition& part, const MacField& u,
                                                 const Field& p, const IBStore& store, std::size_t n_points,
                                                 double time, long step) {
  const GridSpec& g = part.grid();
  Writer w;
  put_field(w, p);
  for (int d = 0; d < g.dim; ++d) put_field(w, u[d]);
  w.put(static_cast<std::int64_t>(store.residents.size()));
  for (const auto& pt : store.residents) {
    w.put(static_cast<std::int64_t>(pt.id));
    put_vec(w, pt.X);
    put_vec(w, pt.U);
  }
  auto msgs = comm.gather(w.take(), tags::kFieldGather);
  if (comm.rank() != 0) return std::nullopt;
  GlobalFields out;
  out.grid = g;
  out.time = time;
  out.step = step;
  out.p.assign(g.total_cells(), 0.0);
  for (int d = 0; d < g.dim; ++d) out.u[d].assign(g.total_cells(), 0.0);
  out.X.assign(n_points, Vec3{});
  out.U.assign(n_points, Vec3{});
  std::vector<char> seen(n_points, 0);
  for (int r = 0; r < comm.size(); ++r) {
    Reader rd(msgs[r]);
    const Box b = part.box(r);
    get_field(rd, b, g, out.p);
    for (int d = 0; d < g.dim; ++d) get_field(rd, b, g, out.u[d]);
    const auto n = rd.get<std::int64_t>();
    for (std::int64_t i = 0; i < n; ++i) {
      const auto id = rd.get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= n_points || seen[id])
        throw ProtocolError("point " + std::to_string(id) + " owned twice or unknown");
      seen[id] = 1;
      out.X[id] = get_vec(rd);
      out.U[id] = get_vec(rd);
    }
  }
  for (std::size_t i = 0; i < n_points; ++i)
    if (!seen[i]) throw ProtocolError("point " + std::to_string(i) + " has no owner");
  return out;
}

inline DiagnosticsRecord membrane_diagnostics(const Problem& pb, const GlobalFields& gf) {
  DiagnosticsRecord rec;
  rec.step = gf.step;
  rec.time = gf.time;
  if (pb.fibers.empty()) return rec;
  const Fiber& f = pb.fibers.front();
  std::vector<Vec3> pts;
  pts.reserve(f.ids.size());
  for (auto id : f.ids) pts.push_back(gf.X[id]);
  Vec3 c = pb.center;
  if (pb.cfg.problem == ProblemKind::MultiEllipse) {
    // Moving membrane: use its own centroid (unwrapped from the first point).
    Vec3 acc{};
    for (const auto& x : pts) {
      Vec3 d{x[0] - pts[0][0], x[1] - pts[0][1], x[2] - pts[0][2]};
      d = min_image(d, pb.grid);
      for (int a = 0; a < 3; ++a) acc[a] += d[a];
    }
    for (int a = 0; a < 3; ++a) c[a] = pts[0][a] + acc[a] / pts.size();
  }
  const auto rs = radius_stats(pts, c, pb.grid, f.plane);
  rec.max_radius = rs.max;
  rec.mean_radius = rs.mean;
  rec.area = enclosed_area(pts, pb.grid, f.plane);
  return rec;
}

}  // namespace detail

/// Runs the configured problem and returns rank-0 results.
inline SimResult simulate(const Problem& pb, const SimOptions& opt = {}) {
  const ProblemConfig& cfg = pb.cfg;
  cfg.validate();
  const GridSpec& g = pb.grid;
  const Partition part = Partition::make(g, cfg.workers);
  const bool bcm = cfg.solver == SolverKind::BCM;
  if (bcm && part.size() != 1) throw ConfigError("the projection solver runs on a single worker");

  GMParams prm;
  prm.rho = cfg.rho;
  prm.mu = cfg.mu;
  prm.dt = cfg.resolved_dt();
  prm.chi = cfg.chi;
  prm.rotate = cfg.rotate;
  prm.validate();
  const long steps = opt.steps ? *opt.steps : cfg.resolved_steps();
  const double h = g.h;
  const std::size_t n_points = pb.points.size();

  Runtime rt(part.size());
  FactorizationCache cache;
  SimResult result;
  result.steps = steps;
  std::vector<PhaseTimes> worker_times(part.size());
  const auto wall0 = std::chrono::steady_clock::now();

  rt.run([&](Comm& comm) {
    const int me = comm.rank();
    const Box box = part.box(me);
    PhaseTimes* times = opt.timing ? &worker_times[me] : nullptr;
    FluidContext ctx{comm, part, cache, times};

    GMState gm;
    BCMState bs;
    std::unique_ptr<SpectralSolver> spectral;
    if (bcm) {
      bs = BCMState(box, kHaloWidth);
      detail::init_velocity(pb, bs.u);
      spectral = std::make_unique<SpectralSolver>(g);
    } else {
      gm = GMState(box, kHaloWidth);
      detail::init_velocity(pb, gm.u);
    }
    auto u = [&]() -> MacField& { return bcm ? bs.u : gm.u; };
    auto p = [&]() -> const Field& { return bcm ? bs.p_half : gm.p_half; };

    IBStore store;
    store.seed(part, me, pb.points, pb.connections);
    const EntityCounts initial = count_entities(comm, store);
    if (me == 0) result.initial_counts = initial;

    MacField force(box, kHaloWidth);

    auto record = [&](long step) {
      exchange_halo(comm, part, u());
      Field div;
      divergence_edge_to_center(u(), h, div);
      const double dn = global_l2(comm, div, h);
      double ke = 0.0;
      for (int d = 0; d < g.dim; ++d)
        u()[d].for_each_interior([&](int i, int j, int k) { ke += u()[d](i, j, k) * u()[d](i, j, k); });
      ke = 0.5 * cfg.rho * comm.allreduce_sum(ke) * g.cell_volume();
      auto gf = detail::gather_fields(comm, part, u(), p(), store, n_points, step * prm.dt, step);
      if (me == 0) {
        DiagnosticsRecord rec = detail::membrane_diagnostics(pb, *gf);
        rec.div_norm = dn;
        rec.kinetic_energy = ke;
        result.diagnostics.push_back(rec);
      }
    };
    auto snapshot = [&](long step) {
      exchange_halo(comm, part, u());
      auto gf = detail::gather_fields(comm, part, u(), p(), store, n_points, step * prm.dt, step);
      if (me == 0) {
        if (opt.on_snapshot) opt.on_snapshot(*gf);
        result.snapshots.push_back(std::move(*gf));
      }
    };

    record(0);
    for (long n = 0; n < steps; ++n) {
      exchange_halo(comm, part, u());
      {
        ScopedPhase t(times, Phase::Interpolate);
        interpolate_velocity(store.residents, u(), h);
      }
      {
        ScopedPhase t(times, Phase::Evolve);
        evolve_ib(store.residents, prm.dt, n);
        for (const auto& pt : store.residents)
          for (int a = 0; a < g.dim; ++a)
            if (!std::isfinite(pt.X[a]) || !std::isfinite(pt.Xh[a]))
              throw NumericalError("non-finite position of point " + std::to_string(pt.id) + " at step " +
                                   std::to_string(n + 1));
      }
      {
        ScopedPhase t(times, Phase::Migrate);
        migrate_ib(comm, part, store);
      }
      {
        ScopedPhase t(times, Phase::Spread);
        force.fill(0.0);
        const auto sources = local_force_sources(store, g);
        spread_force(sources, force, h);
      }
      {
        ScopedPhase t(times, Phase::Cleanup);
        cleanup_ib(part, me, store);
      }
      if (bcm) bcm_step(*spectral, bs, force, prm, h, times);
      else gm_step(ctx, gm, force, prm);

      {
        double bad = 0.0;
        for (int d = 0; d < g.dim; ++d)
          u()[d].for_each_interior([&](int i, int j, int k) {
            if (!std::isfinite(u()[d](i, j, k))) bad = 1.0;
          });
        if (comm.allreduce_max(bad) > 0.0) {
          auto gf = detail::gather_fields(comm, part, u(), p(), store, n_points, (n + 1) * prm.dt, n + 1);
          if (me == 0 && opt.on_fault) opt.on_fault(*gf);
          throw NumericalError("non-finite velocity at step " + std::to_string(n + 1));
        }
      }
      if (opt.audit_entities) {
        const EntityCounts c = count_entities(comm, store);
        if (me == 0 && !(c == initial) && result.entities_conserved) {
          result.entities_conserved = false;
          result.first_count_violation = n;
        }
      }
      if (opt.diag_every > 0 && (n + 1) % opt.diag_every == 0 && n + 1 != steps) record(n + 1);
      if (opt.snapshot_every > 0 && (n + 1) % opt.snapshot_every == 0 && n + 1 != steps) snapshot(n + 1);
    }
    if (steps > 0) record(steps);
    exchange_halo(comm, part, u());
    auto gf = detail::gather_fields(comm, part, u(), p(), store, n_points, steps * prm.dt, steps);
    if (me == 0) {
      if (opt.snapshot_every > 0 && opt.on_snapshot) opt.on_snapshot(*gf);
      result.final = std::move(*gf);
    }
  });

  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  for (const auto& t : worker_times)
    for (std::size_t i = 0; i < kPhaseCount; ++i) result.times.seconds[i] = std::max(result.times.seconds[i], t.seconds[i]);
  return result;
}

}  // namespace ibgm
