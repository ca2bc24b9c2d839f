#pragma once

/// @file ib_structure.hpp
/// @brief Lagrangian points, force connections and the Eulerian/Lagrangian
/// transfer operators.
///
/// Data model: an IBPoint is keyed by a globally unique PointId. A
/// ForceConnection references three points by id (centre, left, right
/// neighbour along its fiber) and produces the elastic force density at its
/// centre point:
///
///   F = sigma D_s^- ( D_s^+ X (1 - L / |D_s^+ X|) )
///
/// with one-sided differences of spacing h_s. `weight` is the Lagrangian
/// quadrature weight used when spreading: h_s for a single fiber, h_s * h_r
/// for a sheet or a stack of fibers. Several connections may share a centre
/// point (e.g. the two fiber families of a woven shell); their forces add.
/// Stiffness is stored as the physical sigma, the 1/h_s^2 factor is applied
/// when the density is evaluated.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ibgm/delta_kernel.hpp"
#include "ibgm/errors.hpp"
#include "ibgm/grid.hpp"

namespace ibgm {

using PointId = std::int64_t;

struct IBPoint {
  PointId id = 0;
  Vec3 X{};       // X^n at step start, X^{n+1} after evolve
  Vec3 Xh{};      // X^{n+1/2}
  Vec3 U{};       // U^n
  Vec3 U_prev{};  // U^{n-1}
};

struct ForceConnection {
  PointId point_id = 0;
  PointId l_point_id = 0;
  PointId r_point_id = 0;
  double sigma = 0.0;
  double rest_L = 0.0;
  double h_s = 1.0;
  double weight = 1.0;
  Vec3 fdens{};
};

/// Shortest periodic representative of a displacement.
inline Vec3 min_image(Vec3 d, const GridSpec& g) {
  for (int a = 0; a < g.dim; ++a) d[a] -= g.length[a] * std::nearbyint(d[a] / g.length[a]);
  return d;
}

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// Tension term T (1 - L/|T|) of one fiber segment.
inline Vec3 segment_tension(const Vec3& t, double rest_L) {
  if (rest_L == 0.0) return t;
  const double len = norm(t);
  if (len == 0.0) throw NumericalError("degenerate fiber segment: zero strain with nonzero resting length");
  const double f = 1.0 - rest_L / len;
  return {t[0] * f, t[1] * f, t[2] * f};
}

/// Evaluates fdens for every connection. `position_of(id)` returns a pointer
/// to the half-step position of a point or nullptr when unknown locally; any
/// unresolved key is a protocol error.
template <class Lookup>
void compute_force_density(std::span<ForceConnection> conns, Lookup&& position_of, const GridSpec& g) {
  for (auto& c : conns) {
    const Vec3* xc = position_of(c.point_id);
    const Vec3* xl = position_of(c.l_point_id);
    const Vec3* xr = position_of(c.r_point_id);
    if (!xc || !xl || !xr)
      throw ProtocolError("force connection at point " + std::to_string(c.point_id) +
                          " references a point that is not available locally");
    Vec3 dp{}, dm{};
    for (int a = 0; a < 3; ++a) {
      dp[a] = (*xr)[a] - (*xc)[a];
      dm[a] = (*xc)[a] - (*xl)[a];
    }
    dp = min_image(dp, g);
    dm = min_image(dm, g);
    const double inv = 1.0 / c.h_s;
    for (int a = 0; a < 3; ++a) {
      dp[a] *= inv;
      dm[a] *= inv;
    }
    const Vec3 tp = segment_tension(dp, c.rest_L);
    const Vec3 tm = segment_tension(dm, c.rest_L);
    for (int a = 0; a < 3; ++a) c.fdens[a] = c.sigma * (tp[a] - tm[a]) * inv;
    for (int a = g.dim; a < 3; ++a) c.fdens[a] = 0.0;
  }
}

/// Tensor-product kernel weights of a physical position against a field's
/// sample locations, in the field's local index space.
struct Stencil {
  int dim = 2;
  std::array<int, 3> base{0, 0, 0};
  std::array<std::array<double, kKernelWidth>, 3> w{};

  int width(int axis) const { return axis < dim ? kKernelWidth : 1; }
};

inline Stencil make_stencil(const Vec3& x, const Field& f, double h) {
  Stencil st;
  st.dim = f.dim();
  for (int a = 0; a < 3; ++a) {
    if (a < st.dim) {
      const double s = x[a] / h - stagger_offset(f.location(), a) - f.box().lo[a];
      const KernelWeights kw = kernel_weights(s);
      st.base[a] = kw.base;
      st.w[a] = kw.w;
    } else {
      st.base[a] = 0;
      st.w[a] = {1.0, 0.0, 0.0, 0.0};
    }
  }
  return st;
}

/// True when every index of the stencil is stored (interior or halo).
inline bool stencil_in_storage(const Stencil& st, const Field& f) {
  for (int a = 0; a < st.dim; ++a) {
    if (st.base[a] < -f.halo() || st.base[a] + kKernelWidth - 1 >= f.extent(a) + f.halo()) return false;
  }
  return true;
}

/// sum_ijk u_ijk delta_h(x_ijk - X) h^d for a single component.
inline double interpolate(const Field& f, const Vec3& x, double h) {
  const Stencil st = make_stencil(x, f, h);
  if (!stencil_in_storage(st, f))
    throw ProtocolError("interpolation stencil leaves the halo region; halo width misconfigured");
  double acc = 0.0;
  for (int c = 0; c < st.width(2); ++c)
    for (int b = 0; b < st.width(1); ++b) {
      const double wyz = st.w[1][b] * st.w[2][c];
      const double* row = f.data() + f.index(st.base[0], st.base[1] + b, st.base[2] + c);
      double s = 0.0;
      for (int a = 0; a < kKernelWidth; ++a) s += row[a] * st.w[0][a];
      acc += s * wyz;
    }
  return acc;
}

/// Adds amount * delta_h(x_ijk - X) to every interior sample of `f` in the
/// kernel support. Samples outside the interior are skipped; those belong to
/// another worker (or to another periodic image of the same point).
inline void spread(Field& f, const Vec3& x, double amount, double h) {
  const Stencil st = make_stencil(x, f, h);
  const double scale = amount / std::pow(h, st.dim);
  for (int c = 0; c < st.width(2); ++c) {
    const int k = st.base[2] + c;
    if (k < 0 || k >= f.extent(2)) continue;
    for (int b = 0; b < st.width(1); ++b) {
      const int j = st.base[1] + b;
      if (j < 0 || j >= f.extent(1)) continue;
      const double wyz = scale * st.w[1][b] * st.w[2][c];
      for (int a = 0; a < kKernelWidth; ++a) {
        const int i = st.base[0] + a;
        if (i < 0 || i >= f.extent(0)) continue;
        f(i, j, k) += wyz * st.w[0][a];
      }
    }
  }
}

/// Step 1a: U_k = interpolated velocity at X_k (per staggered component).
inline void interpolate_velocity(std::span<IBPoint> points, const MacField& u, double h) {
  for (auto& p : points) {
    p.U = {0.0, 0.0, 0.0};
    for (int d = 0; d < u.dim; ++d) p.U[d] = interpolate(u[d], p.X, h);
  }
}

/// A force sample to spread: position and force times quadrature weight.
struct SpreadSource {
  Vec3 x{};
  Vec3 amount{};
};

/// Step 2b: f += sum_k F_k delta_h(x - X_k) w_k on interior samples.
inline void spread_force(std::span<const SpreadSource> sources, MacField& f, double h) {
  for (const auto& s : sources)
    for (int d = 0; d < f.dim; ++d)
      if (s.amount[d] != 0.0) spread(f[d], s.x, s.amount[d], h);
}

/// Steps 1b-1c: AB2 (forward Euler at step 0) position update, half-step
/// average, then U_prev <- U.
inline void evolve_ib(std::span<IBPoint> points, double dt, long step_index) {
  for (auto& p : points) {
    for (int a = 0; a < 3; ++a) {
      const double vel = step_index == 0 ? p.U[a] : 1.5 * p.U[a] - 0.5 * p.U_prev[a];
      const double xn = p.X[a];
      p.X[a] = xn + dt * vel;
      p.Xh[a] = 0.5 * (p.X[a] + xn);
    }
    p.U_prev = p.U;
  }
}

/// Canonical periodic representative in [0, L) per axis.
inline Vec3 wrap_position(Vec3 x, const GridSpec& g) {
  for (int a = 0; a < g.dim; ++a) {
    const double L = g.length[a];
    x[a] -= L * std::floor(x[a] / L);
    if (x[a] >= L) x[a] -= L;
    if (x[a] < 0.0) x[a] = 0.0;
  }
  return x;
}

/// Global cell index containing a wrapped coordinate (clamped for safety).
inline int owning_cell(double x_wrapped, const GridSpec& g, int axis) {
  int c = static_cast<int>(std::floor(x_wrapped / g.h));
  if (c < 0) c = 0;
  if (c >= g.cells[axis]) c = g.cells[axis] - 1;
  return c;
}

}  // namespace ibgm
