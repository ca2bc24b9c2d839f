#include <gtest/gtest.h>

#include <cmath>

#include "ibgm/simulation.hpp"
#include "test_support.hpp"

using namespace ibgm;
using namespace ibgm::test;

namespace {

ProblemConfig ellipse(int N, long steps, std::array<int, 3> workers) {
  ProblemConfig cfg;
  cfg.N = N;
  cfg.steps = steps;
  cfg.dt = 2e-4;
  cfg.workers = workers;
  return cfg;
}

double max_field_diff(const GlobalFields& a, const GlobalFields& b) {
  double m = 0.0;
  for (int d = 0; d < a.grid.dim; ++d) m = std::max(m, max_abs_diff(a.u[d], b.u[d]));
  m = std::max(m, max_abs_diff(a.p, b.p));
  for (std::size_t i = 0; i < a.X.size(); ++i)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(a.X[i][c] - b.X[i][c]));
  return m;
}

}  // namespace

TEST(Simulation, WorkerGridDoesNotChangeTheSolution) {
  const auto serial = simulate(build_problem(ellipse(32, 40, {1, 1, 1})));
  const auto par = simulate(build_problem(ellipse(32, 40, {2, 2, 1})));
  EXPECT_LT(max_field_diff(serial.final, par.final), 1e-10);
  EXPECT_TRUE(par.entities_conserved);
  EXPECT_EQ(par.initial_counts.points, 152);
  EXPECT_EQ(par.initial_counts.connections, 152);
}

TEST(Simulation, RepeatedRunsAreBitIdentical) {
  const auto a = simulate(build_problem(ellipse(32, 20, {2, 2, 1})));
  const auto b = simulate(build_problem(ellipse(32, 20, {2, 2, 1})));
  EXPECT_EQ(a.final.u[0], b.final.u[0]);
  EXPECT_EQ(a.final.p, b.final.p);
  ASSERT_EQ(a.diagnostics.size(), b.diagnostics.size());
  for (std::size_t i = 0; i < a.diagnostics.size(); ++i) EXPECT_EQ(a.diagnostics[i].area, b.diagnostics[i].area);
}

TEST(Simulation, MembraneRelaxesTowardCircle) {
  auto cfg = ellipse(32, 200, {1, 1, 1});
  cfg.dt = 1e-3;
  cfg.output_every = 50;
  SimOptions opt;
  opt.diag_every = 50;
  const auto res = simulate(build_problem(cfg), opt);
  ASSERT_EQ(res.diagnostics.size(), 5u);
  EXPECT_EQ(res.diagnostics.front().step, 0);
  EXPECT_NEAR(res.diagnostics.front().max_radius, 7.0 / 20.0, 1e-12);
  EXPECT_LT(res.diagnostics.back().max_radius, res.diagnostics.front().max_radius);
  EXPECT_GT(res.diagnostics.back().kinetic_energy, 0.0);
}

TEST(Simulation, TaylorGreenKineticEnergyDecays) {
  ProblemConfig cfg;
  cfg.problem = ProblemKind::TaylorGreen;
  cfg.N = 32;
  cfg.steps = 64;
  const auto res = simulate(build_problem(cfg));
  const double t = 64 * cfg.resolved_dt();
  const double ke0 = 0.25;
  const double expect = ke0 * std::exp(-16 * std::numbers::pi * std::numbers::pi * cfg.mu * t);
  EXPECT_NEAR(res.diagnostics.back().kinetic_energy, expect, 0.02 * expect);
  EXPECT_NEAR(res.diagnostics.front().kinetic_energy, ke0, 1e-12);
}

TEST(Simulation, ProjectionSolverRejectsWorkerGrid) {
  auto cfg = ellipse(32, 1, {2, 2, 1});
  cfg.solver = SolverKind::BCM;
  Problem pb;
  pb.cfg = cfg;
  pb.grid = GridSpec::square(2, 32, 1.0);
  EXPECT_THROW(simulate(pb), ConfigError);
}

TEST(Simulation, BlowUpIsReportedWithStep) {
  auto cfg = ellipse(16, 400, {1, 1, 1});
  cfg.sigma = 1e9;
  cfg.dt = 1e-2;
  try {
    simulate(build_problem(cfg));
    FAIL() << "expected a numerical fault";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("at step"), std::string::npos);
  }
}

TEST(Simulation, ZeroStepsReturnsInitialState) {
  const auto pb = build_problem(ellipse(16, 0, {1, 1, 1}));
  const auto res = simulate(pb);
  EXPECT_EQ(res.steps, 0);
  ASSERT_EQ(res.final.X.size(), pb.points.size());
  for (std::size_t i = 0; i < pb.points.size(); ++i) EXPECT_EQ(res.final.X[i], pb.points[i].X);
  EXPECT_EQ(res.times.total(), 0.0);
}
