#include <gtest/gtest.h>

#include <set>

#include "ibgm/partition.hpp"

using namespace ibgm;

TEST(Partition, SingleWorkerCoversGrid) {
  const auto g = GridSpec::square(2, 16, 1.0);
  const auto p = Partition::make(g, {1, 1, 1});
  EXPECT_EQ(p.size(), 1);
  const Box b = p.box(0);
  EXPECT_EQ(b.lo, (std::array<int, 3>{0, 0, 0}));
  EXPECT_EQ(b.n, (std::array<int, 3>{16, 16, 1}));
}

TEST(Partition, NineSubdomainsOfFourByFour) {
  const auto g = GridSpec::square(2, 12, 1.0);
  const auto p = Partition::make(g, {3, 3, 1});
  EXPECT_EQ(p.size(), 9);
  std::set<std::pair<int, int>> origins;
  for (int r = 0; r < 9; ++r) {
    const Box b = p.box(r);
    EXPECT_EQ(b.n[0], 4);
    EXPECT_EQ(b.n[1], 4);
    origins.insert({b.lo[0], b.lo[1]});
    EXPECT_EQ(p.rank_of(p.coords(r)), r);
  }
  EXPECT_EQ(origins.size(), 9u);
}

TEST(Partition, RejectsIndivisibleAndTooSmall) {
  EXPECT_THROW(Partition::make(GridSpec::square(2, 8, 1.0), {3, 1, 1}), ConfigError);
  EXPECT_THROW(Partition::make(GridSpec::square(2, 8, 1.0), {4, 1, 1}), ConfigError);
}

TEST(Partition, NeighboursWrapPeriodically) {
  const auto p = Partition::make(GridSpec::square(2, 16, 1.0), {2, 2, 1});
  EXPECT_EQ(p.neighbor(0, 0, -1), 1);
  EXPECT_EQ(p.neighbor(0, 1, +1), 2);
  EXPECT_EQ(p.neighbor(3, 1, +1), 1);
  EXPECT_EQ(p.row(3, 0), (std::vector<int>{2, 3}));
}

TEST(Partition, OwnerOfUsesHalfOpenBoxes) {
  const auto p = Partition::make(GridSpec::square(2, 16, 1.0), {2, 2, 1});
  EXPECT_EQ(p.owner_of({0.49, 0.49, 0}), 0);
  EXPECT_EQ(p.owner_of({0.5, 0.49, 0}), 1);
  EXPECT_EQ(p.owner_of({0.2, 0.75, 0}), 2);
  EXPECT_EQ(p.owner_of({0.99, 0.99, 0}), 3);
}

namespace {

double global_value(const GridSpec& g, int i, int j, int k) {
  i = Field::wrap(i, g.cells[0]);
  j = Field::wrap(j, g.cells[1]);
  k = Field::wrap(k, g.cells[2]);
  return i + 1000.0 * j + 1e6 * k;
}

void check_exchange(int dim, std::array<int, 3> workers) {
  const auto g = GridSpec::square(dim, 8, 1.0);
  const auto part = Partition::make(g, workers);
  Runtime rt(part.size());
  std::atomic<int> failures{0};
  rt.run([&](Comm& c) {
    const Box b = part.box(c.rank());
    Field f(b, kHaloWidth, Stagger::Center);
    f.fill(-1.0);
    f.for_each_interior([&](int i, int j, int k) { f(i, j, k) = global_value(g, b.lo[0] + i, b.lo[1] + j, b.lo[2] + k); });
    exchange_halo(c, part, f);
    const int gz = dim == 3 ? kHaloWidth : 0;
    for (int k = -gz; k < b.n[2] + gz; ++k)
      for (int j = -kHaloWidth; j < b.n[1] + kHaloWidth; ++j)
        for (int i = -kHaloWidth; i < b.n[0] + kHaloWidth; ++i)
          if (f(i, j, k) != global_value(g, b.lo[0] + i, b.lo[1] + j, b.lo[2] + k)) ++failures;
  });
  EXPECT_EQ(failures.load(), 0);
}

}  // namespace

TEST(HaloExchange, ExhaustiveIndexOracle2D) {
  check_exchange(2, {1, 1, 1});
  check_exchange(2, {2, 1, 1});
  check_exchange(2, {2, 2, 1});
  check_exchange(2, {1, 2, 1});
}

TEST(HaloExchange, ExhaustiveIndexOracle3D) {
  check_exchange(3, {1, 1, 1});
  check_exchange(3, {2, 2, 2});
  check_exchange(3, {2, 1, 2});
}

TEST(HaloExchange, SingleWorkerMatchesPeriodicWrap) {
  const auto g = GridSpec::square(2, 8, 1.0);
  const auto part = Partition::make(g, {1, 1, 1});
  Runtime rt(1);
  rt.run([&](Comm& c) {
    Field a(part.box(0), 2, Stagger::Center);
    a.for_each_interior([&](int i, int j, int) { a(i, j) = std::sin(i + 3.0 * j); });
    Field b = a;
    exchange_halo(c, part, a);
    b.fill_periodic_halo();
    EXPECT_EQ(a.interior_values(), b.interior_values());
    for (std::size_t q = 0; q < a.raw().size(); ++q) EXPECT_EQ(a.raw()[q], b.raw()[q]);
  });
}

TEST(HaloExchange, ConstantFieldStaysConstant) {
  const auto g = GridSpec::square(2, 16, 1.0);
  const auto part = Partition::make(g, {2, 2, 1});
  Runtime rt(4);
  rt.run([&](Comm& c) {
    MacField u(part.box(c.rank()), 2);
    for (int d = 0; d < 2; ++d)
      u[d].for_each_interior([&](int i, int j, int k) { u[d](i, j, k) = 2.5; });
    exchange_halo(c, part, u);
    for (int d = 0; d < 2; ++d)
      for (double v : u[d].raw()) EXPECT_EQ(v, 2.5);
  });
}
