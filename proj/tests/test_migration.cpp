#include <gtest/gtest.h>

#include <algorithm>
#include <mutex>
#include <set>

#include "ibgm/migration.hpp"
#include "ibgm/problems.hpp"
#include "test_support.hpp"

using namespace ibgm;
using namespace ibgm::test;

namespace {

struct StepOutcome {
  std::vector<double> force;           // dense, component-major, x fastest
  std::vector<std::set<PointId>> owned;  // residents per rank after cleanup
  std::vector<std::set<PointId>> ghost_ids;
  long total_points = 0;
  long total_connections = 0;
};

/// One migrate / spread / cleanup cycle of a set of points whose X and Xh
/// are given, on a worker grid.
StepOutcome cycle(const GridSpec& g, std::array<int, 3> workers, const std::vector<IBPoint>& start,
                  const std::vector<IBPoint>& moved, const std::vector<ForceConnection>& conns) {
  const auto part = Partition::make(g, workers);
  StepOutcome out;
  const std::size_t nc = g.total_cells();
  out.force.assign(g.dim * nc, 0.0);
  out.owned.resize(part.size());
  out.ghost_ids.resize(part.size());
  Runtime rt(part.size());
  std::mutex mu;
  rt.run([&](Comm& c) {
    const int me = c.rank();
    const Box b = part.box(me);
    IBStore store;
    store.seed(part, me, start, conns);
    for (auto& p : store.residents) {
      p.X = moved[p.id].X;
      p.Xh = moved[p.id].Xh;
    }
    migrate_ib(c, part, store);
    for (const auto& gp : store.ghosts) out.ghost_ids[me].insert(gp.p.id);
    MacField f(b, kHaloWidth);
    spread_force(local_force_sources(store, g), f, g.h);
    cleanup_ib(part, me, store);
    const EntityCounts counts = count_entities(c, store);
    {
      std::lock_guard lock(mu);
      for (int d = 0; d < g.dim; ++d)
        f[d].for_each_interior([&](int i, int j, int k) {
          const std::size_t q = (b.lo[0] + i) + g.cells[0] * ((b.lo[1] + j) + static_cast<std::size_t>(g.cells[1]) * (b.lo[2] + k));
          out.force[d * nc + q] = f[d](i, j, k);
        });
      for (const auto& p : store.residents) out.owned[me].insert(p.id);
      if (me == 0) {
        out.total_points = counts.points;
        out.total_connections = counts.connections;
      }
    }
  });
  return out;
}

Problem ring(int N) {
  ProblemConfig cfg;
  cfg.problem = ProblemKind::ThinEllipse;
  cfg.N = N;
  auto pb = build_problem(cfg);
  for (auto& p : pb.points) p.Xh = p.X;
  return pb;
}

}  // namespace

TEST(Migration, SpreadForceIndependentOfWorkerGrid) {
  const auto pb = ring(32);
  auto moved = pb.points;
  for (auto& p : moved) {
    p.Xh = {p.X[0] + 0.3 * pb.grid.h, p.X[1] - 0.2 * pb.grid.h, 0.0};
    p.X = {p.X[0] + 0.6 * pb.grid.h, p.X[1] - 0.4 * pb.grid.h, 0.0};
  }
  const auto serial = cycle(pb.grid, {1, 1, 1}, pb.points, moved, pb.connections);
  EXPECT_GT(max_abs(serial.force), 1.0);
  for (const auto& w : std::vector<std::array<int, 3>>{{2, 2, 1}, {4, 2, 1}, {4, 4, 1}}) {
    const auto par = cycle(pb.grid, w, pb.points, moved, pb.connections);
    EXPECT_LT(max_abs_diff(par.force, serial.force), 1e-12 * max_abs(serial.force));
    EXPECT_EQ(par.total_points, static_cast<long>(pb.points.size()));
    EXPECT_EQ(par.total_connections, static_cast<long>(pb.connections.size()));
  }
}

TEST(Migration, RingAcrossPeriodicSeamMatchesSerial) {
  auto pb = ring(32);
  // Shift the ring so that it straddles x = 0 and y = 0.
  for (auto& p : pb.points) {
    p.X = wrap_position({p.X[0] - 0.5, p.X[1] - 0.5, 0.0}, pb.grid);
    p.Xh = p.X;
  }
  const auto serial = cycle(pb.grid, {1, 1, 1}, pb.points, pb.points, pb.connections);
  const auto par = cycle(pb.grid, {2, 2, 1}, pb.points, pb.points, pb.connections);
  EXPECT_LT(max_abs_diff(par.force, serial.force), 1e-12 * max_abs(serial.force));
}

TEST(Migration, CrossingPointChangesOwner) {
  const auto g = GridSpec::square(2, 32, 1.0);
  std::vector<IBPoint> pts(3);
  std::vector<ForceConnection> conns;
  for (int k = 0; k < 3; ++k) {
    pts[k].id = k;
    pts[k].X = {0.49, 0.2 + 0.01 * k, 0.0};
    pts[k].Xh = pts[k].X;
    ForceConnection c;
    c.point_id = k;
    c.l_point_id = (k + 2) % 3;
    c.r_point_id = (k + 1) % 3;
    c.h_s = 1.0 / 3;
    c.weight = 1.0 / 3;
    conns.push_back(c);
  }
  auto moved = pts;
  moved[0].X = {0.51, 0.2, 0.0};      // into rank 1
  moved[1].X = {-0.005, 0.21, 0.0};  // across the periodic seam, into rank 1
  const auto out = cycle(g, {2, 2, 1}, pts, moved, conns);
  EXPECT_EQ(out.owned[0], (std::set<PointId>{2}));
  EXPECT_EQ(out.owned[1], (std::set<PointId>{0, 1}));
  EXPECT_EQ(out.total_points, 3);
  EXPECT_EQ(out.total_connections, 3);
}

TEST(Migration, DeepInteriorPointIsNeverSent) {
  const auto g = GridSpec::square(2, 32, 1.0);
  std::vector<IBPoint> pts(1);
  pts[0].id = 0;
  pts[0].X = {0.25, 0.25, 0.0};
  pts[0].Xh = pts[0].X;
  const auto out = cycle(g, {2, 2, 1}, pts, pts, {});
  for (int r = 1; r < 4; ++r) EXPECT_TRUE(out.ghost_ids[r].empty());
  EXPECT_EQ(out.owned[0], (std::set<PointId>{0}));
}

TEST(Migration, BoundaryPointReachesNeighbours) {
  const auto g = GridSpec::square(2, 32, 1.0);
  std::vector<IBPoint> pts(1);
  pts[0].id = 0;
  pts[0].X = {0.49, 0.49, 0.0};
  pts[0].Xh = pts[0].X;
  const auto out = cycle(g, {2, 2, 1}, pts, pts, {});
  for (int r = 1; r < 4; ++r) EXPECT_EQ(out.ghost_ids[r], (std::set<PointId>{0}));
}

TEST(Migration, StraddlingConnectionSeesBothEndpoints) {
  // A two-point fiber split across ranks 0 and 1: each rank spreads its own
  // centre with a force computed from the remote endpoint.
  const auto g = GridSpec::square(2, 32, 1.0);
  std::vector<IBPoint> pts(2);
  pts[0].id = 0;
  pts[0].X = {0.48, 0.25, 0.0};
  pts[1].id = 1;
  pts[1].X = {0.52, 0.25, 0.0};
  for (auto& p : pts) p.Xh = p.X;
  std::vector<ForceConnection> conns(2);
  for (int k = 0; k < 2; ++k) {
    conns[k].point_id = k;
    conns[k].l_point_id = 1 - k;
    conns[k].r_point_id = 1 - k;
    conns[k].sigma = 1.0;
    conns[k].h_s = 0.5;
    conns[k].weight = 0.5;
  }
  const auto serial = cycle(g, {1, 1, 1}, pts, pts, conns);
  const auto par = cycle(g, {2, 2, 1}, pts, pts, conns);
  EXPECT_GT(max_abs(serial.force), 0.0);
  EXPECT_LT(max_abs_diff(par.force, serial.force), 1e-12 * max_abs(serial.force));
}
