#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ibgm/operators.hpp"
#include "test_support.hpp"

using namespace ibgm;
using ibgm::test::sampled;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(SecondDifference, AnnihilatesConstants) {
  const auto g = GridSpec::square(2, 8, 1.0);
  const Field f = sampled(g, Stagger::Center, [](double, double, double) { return 3.7; });
  for (int axis = 0; axis < 2; ++axis) {
    const Field out = second_difference(f, axis, g.h);
    out.for_each_interior([&](int i, int j, int k) { EXPECT_NEAR(out(i, j, k), 0.0, 1e-12); });
  }
}

TEST(SecondDifference, SineIsDiscreteEigenfunction) {
  const auto g = GridSpec::square(2, 64, 1.0);
  const Field f = sampled(g, Stagger::Center, [](double x, double, double) { return std::sin(2 * kPi * x); });
  const Field out = second_difference(f, 0, g.h);
  const double lam = -(2.0 - 2.0 * std::cos(2 * kPi * g.h)) / (g.h * g.h);
  out.for_each_interior([&](int i, int j, int k) { EXPECT_NEAR(out(i, j, k), lam * f(i, j, k), 1e-9); });
}

TEST(SecondDifference, HandComputedWrap) {
  const auto g = GridSpec::square(2, 4, 4.0);  // h = 1
  Field f(Box::whole(g), 1, Stagger::Center);
  for (int j = 0; j < 4; ++j) f(0, j) = 1.0;
  f.fill_periodic_halo();
  const Field out = second_difference(f, 0, 1.0);
  const double expect[4] = {-2, 1, 0, 1};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out(i, 2), expect[i]);
}

TEST(SecondDifference, RejectsBadAxis) {
  const auto g = GridSpec::square(2, 4, 1.0);
  Field f(Box::whole(g), 1, Stagger::Center);
  EXPECT_THROW(second_difference(f, 2, g.h), std::invalid_argument);
}

TEST(Gradient, ConstantGivesZero) {
  const auto g = GridSpec::square(2, 8, 1.0);
  const Field p = sampled(g, Stagger::Center, [](double, double, double) { return -2.0; });
  MacField gp;
  gradient_center_to_edge(p, g.h, gp);
  for (int d = 0; d < 2; ++d) gp[d].for_each_interior([&](int i, int j, int k) { EXPECT_EQ(gp[d](i, j, k), 0.0); });
}

TEST(Gradient, MatchesDirectDifferenceOfSine) {
  const auto g = GridSpec::square(2, 16, 1.0);
  const Field p = sampled(g, Stagger::Center, [](double x, double, double) { return std::sin(2 * kPi * x); });
  MacField gp;
  gradient_center_to_edge(p, g.h, gp);
  EXPECT_EQ(gp[0].location(), Stagger::EdgeX);
  gp[0].for_each_interior([&](int i, int j, int k) {
    const double xc = (i + 0.5) * g.h, xm = (i - 0.5) * g.h;
    EXPECT_NEAR(gp[0](i, j, k), (std::sin(2 * kPi * xc) - std::sin(2 * kPi * xm)) / g.h, 1e-12);
  });
}

TEST(Gradient, RejectsEdgeInput) {
  const auto g = GridSpec::square(2, 8, 1.0);
  Field p(Box::whole(g), 1, Stagger::EdgeX);
  MacField gp;
  EXPECT_THROW(gradient_center_to_edge(p, g.h, gp), std::invalid_argument);
}

TEST(Divergence, OfGradientIsFivePointLaplacian) {
  std::mt19937_64 rng(7);
  for (int dim : {2, 3}) {
    const auto g = GridSpec::square(dim, 8, 1.0);
    Field p(Box::whole(g), 2, Stagger::Center);
    test::randomize(p, rng);
    MacField gp;
    gradient_center_to_edge(p, g.h, gp);
    gp.fill_periodic_halo();
    Field div;
    divergence_edge_to_center(gp, g.h, div);
    Field sum(Box::whole(g), 2, Stagger::Center), dd;
    for (int a = 0; a < dim; ++a) {
      second_difference(p, a, g.h, dd);
      sum.for_each_interior([&](int i, int j, int k) { sum(i, j, k) += dd(i, j, k); });
    }
    div.for_each_interior([&](int i, int j, int k) { EXPECT_NEAR(div(i, j, k), sum(i, j, k), 1e-9); });
  }
}

TEST(Divergence, ConstantVectorFieldIsFree) {
  const auto g = GridSpec::square(2, 8, 1.0);
  MacField u(Box::whole(g), 1);
  u[0].fill(0.3);
  u[1].fill(-1.1);
  Field div;
  divergence_edge_to_center(u, g.h, div);
  div.for_each_interior([&](int i, int j, int k) { EXPECT_EQ(div(i, j, k), 0.0); });
}

TEST(Divergence, SecondOrderForSine) {
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const auto g = GridSpec::square(2, n, 1.0);
    MacField u(Box::whole(g), 1);
    u[0] = sampled(g, Stagger::EdgeX, [](double x, double, double) { return std::sin(2 * kPi * x); }, 1);
    Field div;
    divergence_edge_to_center(u, g.h, div);
    double err = 0.0;
    div.for_each_interior([&](int i, int j, int k) {
      err = std::max(err, std::abs(div(i, j, k) - 2 * kPi * std::cos(2 * kPi * (i + 0.5) * g.h)));
    });
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 4.0, 0.1);
    }
    prev = err;
  }
}

TEST(Divergence, SumsToZeroOnPeriodicGrid) {
  std::mt19937_64 rng(3);
  const auto g = GridSpec::square(3, 8, 1.0);
  MacField u(Box::whole(g), 1);
  test::randomize(u, rng);
  Field div;
  divergence_edge_to_center(u, g.h, div);
  double s = 0.0;
  div.for_each_interior([&](int i, int j, int k) { s += div(i, j, k); });
  EXPECT_NEAR(s, 0.0, 1e-11);
}

TEST(Advection, UniformFlowGivesZero) {
  const auto g = GridSpec::square(2, 8, 1.0);
  MacField u(Box::whole(g), 1);
  u[0].fill(0.5);
  u[1].fill(0.8660254037844386);
  MacField n;
  advection_skew(u, g.h, n);
  for (int d = 0; d < 2; ++d) n[d].for_each_interior([&](int i, int j, int k) { EXPECT_NEAR(n[d](i, j, k), 0.0, 1e-13); });
}

TEST(Advection, KineticEnergyNeutral) {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    const auto g = GridSpec::square(dim, 8, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      MacField u(Box::whole(g), 2);
      test::randomize(u, rng);
      MacField n;
      advection_skew(u, g.h, n);
      double dot = 0.0, scale = 0.0;
      for (int d = 0; d < dim; ++d)
        u[d].for_each_interior([&](int i, int j, int k) {
          dot += u[d](i, j, k) * n[d](i, j, k);
          scale += std::abs(u[d](i, j, k) * n[d](i, j, k));
        });
      EXPECT_LE(std::abs(dot) * g.cell_volume(), 1e-12 * std::max(1.0, scale * g.cell_volume()));
    }
  }
}

TEST(Advection, SecondOrderOnTaylorGreen) {
  // For this field u.grad u = -grad(p) with p = (cos 4 pi x + cos 4 pi y) / 4,
  // so (u.grad u)_x = pi sin(4 pi x) and (u.grad u)_y = pi sin(4 pi y).
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const auto g = GridSpec::square(2, n, 1.0);
    MacField u(Box::whole(g), 2);
    u[0] = sampled(g, Stagger::EdgeX, [](double x, double y, double) { return std::sin(2 * kPi * x) * std::cos(2 * kPi * y); });
    u[1] = sampled(g, Stagger::EdgeY, [](double x, double y, double) { return -std::cos(2 * kPi * x) * std::sin(2 * kPi * y); });
    MacField nu;
    advection_skew(u, g.h, nu);
    double err = 0.0;
    nu[0].for_each_interior([&](int i, int, int) {
      err = std::max(err, std::abs(nu[0](i, 0, 0) - kPi * std::sin(4 * kPi * i * g.h)));
    });
    nu[1].for_each_interior([&](int, int j, int) {
      err = std::max(err, std::abs(nu[1](0, j, 0) - kPi * std::sin(4 * kPi * j * g.h)));
    });
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
    }
    prev = err;
  }
}
