#include <gtest/gtest.h>

#include <cmath>

#include "ibgm/delta_kernel.hpp"

using namespace ibgm;

TEST(Phi, ValueAtOrigin) { EXPECT_DOUBLE_EQ(phi(0.0), 0.5); }

TEST(Phi, VanishesAtSupportBoundary) {
  EXPECT_EQ(phi(2.0), 0.0);
  EXPECT_EQ(phi(-2.0), 0.0);
  EXPECT_EQ(phi(2.5), 0.0);
}

TEST(Phi, IsEven) {
  for (double r = 0.0; r < 2.0; r += 0.0625) EXPECT_DOUBLE_EQ(phi(r), phi(-r));
}

TEST(Phi, PartitionOfUnity) {
  const double r = 0.3;
  EXPECT_NEAR(phi(r - 1) + phi(r) + phi(r + 1) + phi(r - 2), 1.0, 1e-14);
}

TEST(Phi, EvenOddSumsAndSquares) {
  // Known moment conditions of the four-point kernel.
  for (double r = 0.0; r < 1.0; r += 0.1) {
    const double a = phi(r - 2) + phi(r), b = phi(r - 1) + phi(r + 1);
    EXPECT_NEAR(a, 0.5, 1e-14);
    EXPECT_NEAR(b, 0.5, 1e-14);
    double first = 0.0, sq = 0.0;
    for (int j = -1; j <= 2; ++j) {
      first += (r - j) * phi(r - j);
      sq += phi(r - j) * phi(r - j);
    }
    EXPECT_NEAR(first, 0.0, 1e-14);
    EXPECT_NEAR(sq, 3.0 / 8.0, 1e-14);
  }
}

TEST(KernelWeights, CoverFourIndicesAndSumToOne) {
  for (double s : {-0.7, 0.0, 0.25, 3.5, 17.999}) {
    const auto kw = kernel_weights(s);
    EXPECT_EQ(kw.base, static_cast<int>(std::floor(s)) - 1);
    double sum = 0.0;
    for (int a = 0; a < kKernelWidth; ++a) {
      EXPECT_DOUBLE_EQ(kw.w[a], phi(s - (kw.base + a)));
      sum += kw.w[a];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
}

TEST(KernelWeights, OnGridPointTableau) {
  const auto kw = kernel_weights(5.0);
  EXPECT_EQ(kw.base, 4);
  EXPECT_DOUBLE_EQ(kw.w[0], 0.25);
  EXPECT_DOUBLE_EQ(kw.w[1], 0.5);
  EXPECT_DOUBLE_EQ(kw.w[2], 0.25);
  EXPECT_DOUBLE_EQ(kw.w[3], 0.0);
}
