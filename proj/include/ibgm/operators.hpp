#pragma once

/// @file operators.hpp
/// @brief Periodic finite-difference operators on the MAC grid.
///
/// Every operator writes the interior of its output and reads the input at
/// most one cell beyond the interior, so a halo width of one is enough. The
/// caller is responsible for the halo being current (periodic wrap in a
/// serial run, neighbour exchange in a partitioned one). Output halos are
/// left untouched.

#include <array>
#include <stdexcept>

#include "ibgm/grid.hpp"

namespace ibgm {

namespace detail {
inline void check_axis(int axis, int dim) {
  if (axis < 0 || axis >= dim) throw std::invalid_argument("axis out of range for grid dimension");
}
inline void check_output(const Field& in, Field& out) {
  if (!out.same_shape(in)) out = Field(in.box(), in.halo(), in.location());
}
}  // namespace detail

/// out = (f[+1] - 2 f + f[-1]) / h^2 along `axis`; same location as input.
inline void second_difference(const Field& f, int axis, double h, Field& out) {
  detail::check_axis(axis, f.dim());
  detail::check_output(f, out);
  out.set_location(f.location());
  const auto s = f.stride(axis);
  const double inv_h2 = 1.0 / (h * h);
  const double* src = f.data();
  double* dst = out.data();
  f.for_each_interior([&](int i, int j, int k) {
    const auto q = f.index(i, j, k);
    dst[q] = (src[q + s] - 2.0 * src[q] + src[q - s]) * inv_h2;
  });
}

inline Field second_difference(const Field& f, int axis, double h) {
  Field out;
  second_difference(f, axis, h, out);
  return out;
}

/// Sum of second differences over all axes (5-point / 7-point Laplacian).
inline void laplacian(const Field& f, double h, Field& out) {
  detail::check_output(f, out);
  out.set_location(f.location());
  const double inv_h2 = 1.0 / (h * h);
  const double* src = f.data();
  double* dst = out.data();
  const int dim = f.dim();
  const std::array<std::ptrdiff_t, 3> st{f.stride(0), f.stride(1), f.stride(2)};
  f.for_each_interior([&](int i, int j, int k) {
    const auto q = f.index(i, j, k);
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) acc += src[q + st[d]] - 2.0 * src[q] + src[q - st[d]];
    dst[q] = acc * inv_h2;
  });
}

/// G^{C->E}: component d is (p[idx] - p[idx - e_d]) / h on Edge(d).
inline void gradient_center_to_edge(const Field& p, double h, MacField& out) {
  require_location(p, Stagger::Center, "gradient_center_to_edge");
  const int dim = p.dim();
  if (out.dim != dim || !out[0].same_shape(p)) out = MacField(p.box(), p.halo());
  const double inv_h = 1.0 / h;
  const double* src = p.data();
  for (int d = 0; d < dim; ++d) {
    const auto s = p.stride(d);
    double* dst = out[d].data();
    p.for_each_interior([&](int i, int j, int k) {
      const auto q = p.index(i, j, k);
      dst[q] = (src[q] - src[q - s]) * inv_h;
    });
  }
}

/// D^{E->C}: sum over d of (u_d[idx + e_d] - u_d[idx]) / h at cell centres.
inline void divergence_edge_to_center(const MacField& u, double h, Field& out) {
  for (int d = 0; d < u.dim; ++d) require_location(u[d], edge_stagger(d), "divergence_edge_to_center");
  if (!out.same_shape(u[0])) out = Field(u.box(), u[0].halo(), Stagger::Center);
  out.set_location(Stagger::Center);
  const double inv_h = 1.0 / h;
  double* dst = out.data();
  const Field& f0 = u[0];
  f0.for_each_interior([&](int i, int j, int k) {
    const auto q = f0.index(i, j, k);
    double acc = 0.0;
    for (int d = 0; d < u.dim; ++d) {
      const double* c = u[d].data();
      acc += c[q + f0.stride(d)] - c[q];
    }
    dst[q] = acc * inv_h;
  });
}

/// Skew-symmetric advection N(u) = 1/2 (u.grad u) + 1/2 div(u u) with
/// second-order centred interpolation on the staggered grid.
///
/// For component c along direction d, the transport velocity on the face
/// between u_c[idx] and u_c[idx + e_d] is the two-point average of u_d at
/// that face. With T+ / T- the transports on the upper / lower face, the
/// divergence form is sum_d (T+ avg(u0,u+) - T- avg(u-,u0)) / h and the
/// advective form sum_d (T+ (u+ - u0) + T- (u0 - u-)) / (2h); their mean
/// collapses to sum_d (T+ u+ - T- u-) / (2h), which makes sum(u . N(u)) vanish
/// face by face for any transport field.
inline void advection_skew(const MacField& u, double h, MacField& out) {
  const int dim = u.dim;
  if (out.dim != dim || !out[0].same_shape(u[0])) out = MacField(u.box(), u[0].halo());
  const double inv_2h = 0.5 / h;
  const Field& ref = u[0];
  std::array<std::ptrdiff_t, 3> st{ref.stride(0), ref.stride(1), ref.stride(2)};
  for (int c = 0; c < dim; ++c) {
    const double* uc = u[c].data();
    double* dst = out[c].data();
    ref.for_each_interior([&](int i, int j, int k) {
      const auto q = ref.index(i, j, k);
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) {
        const auto sd = st[d];
        double t_plus, t_minus;
        if (d == c) {
          t_plus = 0.5 * (uc[q] + uc[q + sd]);
          t_minus = 0.5 * (uc[q - sd] + uc[q]);
        } else {
          const double* ud = u[d].data();
          const auto sc = st[c];
          t_plus = 0.5 * (ud[q + sd] + ud[q + sd - sc]);
          t_minus = 0.5 * (ud[q] + ud[q - sc]);
        }
        acc += t_plus * uc[q + sd] - t_minus * uc[q - sd];
      }
      dst[q] = acc * inv_2h;
    });
  }
}

}  // namespace ibgm
