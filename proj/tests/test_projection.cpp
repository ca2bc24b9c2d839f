#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ibgm/projection.hpp"
#include "test_support.hpp"

using namespace ibgm;
using namespace ibgm::test;

namespace {

constexpr double kPi = std::numbers::pi;

double max_interior(const Field& f) {
  double m = 0.0;
  f.for_each_interior([&](int i, int j, int k) { m = std::max(m, std::abs(f(i, j, k))); });
  return m;
}

}  // namespace

TEST(SpectralSolver, PoissonInvertsDiscreteLaplacian) {
  std::mt19937_64 rng(3);
  for (int dim : {2, 3}) {
    const auto g = GridSpec::square(dim, 8, 1.0);
    SpectralSolver spec(g);
    Field x(Box::whole(g), 2, Stagger::Center);
    randomize(x, rng);
    double mean = 0.0;
    x.for_each_interior([&](int i, int j, int k) { mean += x(i, j, k); });
    mean /= static_cast<double>(g.total_cells());
    x.for_each_interior([&](int i, int j, int k) { x(i, j, k) -= mean; });
    x.fill_periodic_halo();
    Field lap;
    laplacian(x, g.h, lap);
    spec.poisson(lap);
    double err = 0.0;
    x.for_each_interior([&](int i, int j, int k) { err = std::max(err, std::abs(lap(i, j, k) - x(i, j, k))); });
    EXPECT_LT(err, 1e-11);
  }
}

TEST(SpectralSolver, HelmholtzInvertsShiftedLaplacian) {
  std::mt19937_64 rng(5);
  const auto g = GridSpec::square(2, 16, 1.0);
  SpectralSolver spec(g);
  Field x(Box::whole(g), 2, Stagger::EdgeX);
  randomize(x, rng);
  Field lap;
  laplacian(x, g.h, lap);
  const double alpha = 3e-3;
  Field rhs = x;
  rhs.for_each_interior([&](int i, int j, int k) { rhs(i, j, k) = x(i, j, k) - alpha * lap(i, j, k); });
  spec.helmholtz(rhs, alpha);
  double err = 0.0;
  x.for_each_interior([&](int i, int j, int k) { err = std::max(err, std::abs(rhs(i, j, k) - x(i, j, k))); });
  EXPECT_LT(err, 1e-12);
}

TEST(BcmStep, VelocityIsDiscretelySolenoidal) {
  std::mt19937_64 rng(7);
  const auto g = GridSpec::square(2, 32, 1.0);
  SpectralSolver spec(g);
  BCMState s(Box::whole(g), 2);
  randomize(s.u, rng);
  MacField f(Box::whole(g), 2);
  randomize(f, rng);
  GMParams prm;
  prm.dt = 1e-3;
  for (int n = 0; n < 3; ++n) {
    bcm_step(spec, s, f, prm, g.h);
    Field div;
    divergence_edge_to_center(s.u, g.h, div);
    double l2 = 0.0;
    div.for_each_interior([&](int i, int j, int k) { l2 += div(i, j, k) * div(i, j, k) * g.h * g.h; });
    EXPECT_LE(std::sqrt(l2), 1e-12);
  }
}

TEST(BcmStep, ZeroStateStaysZero) {
  const auto g = GridSpec::square(2, 16, 1.0);
  SpectralSolver spec(g);
  BCMState s(Box::whole(g), 2);
  MacField f(Box::whole(g), 2);
  GMParams prm;
  for (int n = 0; n < 4; ++n) bcm_step(spec, s, f, prm, g.h);
  for (int d = 0; d < 2; ++d) EXPECT_EQ(max_interior(s.u[d]), 0.0);
  EXPECT_EQ(max_interior(s.p_half), 0.0);
}

TEST(BcmStep, TaylorGreenDecayRate) {
  const auto g = GridSpec::square(2, 64, 1.0);
  SpectralSolver spec(g);
  BCMState s(Box::whole(g), 2);
  s.u[0] = sampled(g, Stagger::EdgeX, [](double x, double y, double) { return std::sin(2 * kPi * x) * std::cos(2 * kPi * y); });
  s.u[1] = sampled(g, Stagger::EdgeY, [](double x, double y, double) { return -std::cos(2 * kPi * x) * std::sin(2 * kPi * y); });
  MacField f(Box::whole(g), 2);
  GMParams prm;
  prm.mu = 0.01;
  prm.dt = 2e-3;
  for (int n = 0; n < 100; ++n) bcm_step(spec, s, f, prm, g.h);
  const double t = 100 * prm.dt;
  const double decay = std::exp(-8 * kPi * kPi * prm.mu * t);
  double err = 0.0;
  s.u[0].for_each_interior([&](int i, int j, int) {
    const double x = g.coord(Stagger::EdgeX, 0, i), y = g.coord(Stagger::EdgeX, 1, j);
    err = std::max(err, std::abs(s.u[0](i, j) - decay * std::sin(2 * kPi * x) * std::cos(2 * kPi * y)));
  });
  EXPECT_LT(err, 5e-3);
}
