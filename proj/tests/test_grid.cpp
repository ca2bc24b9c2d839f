#include <gtest/gtest.h>

#include "ibgm/grid.hpp"

using namespace ibgm;

TEST(GridSpec, SquareDerivesSpacingAndLength) {
  const auto g = GridSpec::square(2, 64, 1.0);
  EXPECT_DOUBLE_EQ(g.h, 1.0 / 64);
  EXPECT_EQ(g.cells[2], 1);
  EXPECT_EQ(g.total_cells(), 64u * 64u);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 1.0 / 4096);
}

TEST(GridSpec, TiledDomainKeepsMeshWidth) {
  const auto g = GridSpec::tiled(2, {64, 32, 1}, 1.0 / 32);
  EXPECT_DOUBLE_EQ(g.length[0], 2.0);
  EXPECT_DOUBLE_EQ(g.length[1], 1.0);
}

TEST(GridSpec, RejectsTooFewCells) {
  EXPECT_THROW(GridSpec::square(2, 3, 1.0), ConfigError);
  EXPECT_THROW(GridSpec::square(4, 8, 1.0), ConfigError);
}

TEST(GridSpec, StaggeredCoordinates) {
  const auto g = GridSpec::square(2, 8, 1.0);
  EXPECT_DOUBLE_EQ(g.coord(Stagger::EdgeX, 0, 3), 3.0 / 8);
  EXPECT_DOUBLE_EQ(g.coord(Stagger::EdgeX, 1, 3), 3.5 / 8);
  EXPECT_DOUBLE_EQ(g.coord(Stagger::EdgeY, 0, 3), 3.5 / 8);
  EXPECT_DOUBLE_EQ(g.coord(Stagger::EdgeY, 1, 3), 3.0 / 8);
  EXPECT_DOUBLE_EQ(g.coord(Stagger::Center, 0, 0), 0.5 / 8);
}

TEST(Field, IndexingAndStrides) {
  Box b;
  b.dim = 3;
  b.n = {4, 5, 6};
  Field f(b, 2, Stagger::Center);
  EXPECT_EQ(f.stride(0), 1);
  EXPECT_EQ(f.stride(1), 8);
  EXPECT_EQ(f.stride(2), 8 * 9);
  EXPECT_EQ(f.index(1, 0, 0) - f.index(0, 0, 0), 1);
  EXPECT_EQ(f.raw().size(), 8u * 9u * 10u);
}

TEST(Field, PeriodicHaloWrapsInterior) {
  const auto g = GridSpec::square(2, 4, 1.0);
  Field f(Box::whole(g), 2, Stagger::Center);
  f.for_each_interior([&](int i, int j, int) { f(i, j) = 10 * i + j; });
  f.fill_periodic_halo();
  EXPECT_EQ(f(-1, 0), 30);
  EXPECT_EQ(f(-2, 1), 21);
  EXPECT_EQ(f(4, 3), 3);
  EXPECT_EQ(f(5, -1), 13);
}

TEST(Field, InteriorRoundTrip) {
  const auto g = GridSpec::square(2, 4, 1.0);
  Field f(Box::whole(g), 1, Stagger::Center);
  std::vector<double> v(16);
  for (int i = 0; i < 16; ++i) v[i] = i;
  f.set_interior(v);
  EXPECT_EQ(f.interior_values(), v);
  EXPECT_DOUBLE_EQ(f(1, 2), 9.0);
  EXPECT_THROW(f.set_interior(std::vector<double>(3)), std::invalid_argument);
}

TEST(MacField, ComponentsLiveOnTheirEdges) {
  const auto g = GridSpec::square(3, 4, 1.0);
  MacField u(Box::whole(g), 1);
  EXPECT_EQ(u[0].location(), Stagger::EdgeX);
  EXPECT_EQ(u[1].location(), Stagger::EdgeY);
  EXPECT_EQ(u[2].location(), Stagger::EdgeZ);
}

TEST(Field, LocationMismatchIsRejected) {
  const auto g = GridSpec::square(2, 4, 1.0);
  Field f(Box::whole(g), 1, Stagger::EdgeX);
  EXPECT_THROW(require_location(f, Stagger::Center, "test"), std::invalid_argument);
  EXPECT_NO_THROW(require_location(f, Stagger::EdgeX, "test"));
}
