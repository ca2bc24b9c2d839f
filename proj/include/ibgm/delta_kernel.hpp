#pragma once

/// @file delta_kernel.hpp
/// @brief Peskin's four-point regularised delta function.

#include <array>
#include <cmath>

namespace ibgm {

/// Support radius of phi in cells.
inline constexpr int kKernelRadius = 2;
/// Grid points touched per axis.
inline constexpr int kKernelWidth = 4;

/// One-dimensional kernel; delta_h(x) = prod_d phi(x_d / h) / h^d.
inline double phi(double r) {
  const double a = std::abs(r);
  if (a < 1.0) return 0.125 * (3.0 - 2.0 * a + std::sqrt(1.0 + 4.0 * a - 4.0 * a * a));
  if (a < 2.0) return 0.125 * (5.0 - 2.0 * a - std::sqrt(-7.0 + 12.0 * a - 4.0 * a * a));
  return 0.0;
}

/// Weights of the four grid indices base .. base+3 for a sample at
/// fractional index `s` (position measured in cells from index 0).
struct KernelWeights {
  int base = 0;
  std::array<double, kKernelWidth> w{};
};

inline KernelWeights kernel_weights(double s) {
  KernelWeights kw;
  const double fl = std::floor(s);
  kw.base = static_cast<int>(fl) - 1;
  const double r = s - fl;  // in [0, 1)
  kw.w[0] = phi(r + 1.0);
  kw.w[1] = phi(r);
  kw.w[2] = phi(r - 1.0);
  kw.w[3] = phi(r - 2.0);
  return kw;
}

}  // namespace ibgm
