#pragma once

/// @file gm_fluid.hpp
/// @brief Pseudo-compressible direction-split fluid stepper (rotational,
/// three-stage variant) on the partitioned MAC grid.
///
/// One step, with kappa = mu dt / (2 rho):
///   N^{n+1/2} = 3/2 N(u^n) - 1/2 N(u^{n-1})          (N(u^0) at step 0)
///   p*        = p^{n-1/2} + psi^{n-1/2}               (0 at step 0)
///   u*        = u^n + dt/rho [mu L u^n - G p* + f - rho N^{n+1/2}]
///   (1 - kappa D_aa) u_a = u_{a-1} - kappa D_aa u^n   for each axis a
///   prod_a (1 - D_aa) psi = -(rho/dt) D u^{n+1}
///   p^{n+1/2} = p^{n-1/2} + psi - chi mu D (u^{n+1} + u^n) / 2
/// The perturbation parameter equals dt. Axis order is forward on even
/// steps and reversed on odd steps when rotation is on.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ibgm/comm.hpp"
#include "ibgm/errors.hpp"
#include "ibgm/grid.hpp"
#include "ibgm/line_solver.hpp"
#include "ibgm/operators.hpp"
#include "ibgm/partition.hpp"
#include "ibgm/timing.hpp"
#include "ibgm/tridiag.hpp"

namespace ibgm {

struct GMParams {
  double rho = 1.0;
  double mu = 0.01;
  double dt = 1e-3;
  double chi = 0.6;
  bool rotate = true;

  void validate() const {
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    if (!(mu >= 0.0)) throw ConfigError("mu must be non-negative");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(chi > 0.0 && chi <= 1.0)) throw ConfigError("chi must lie in (0, 1]");
  }
  double eps() const { return dt; }
};

struct GMState {
  MacField u;         // u^n
  MacField adv_prev;  // N(u^{n-1})
  Field p_half;       // p^{n-1/2}
  Field psi_half;     // psi^{n-1/2}
  long step_index = 0;

  GMState() = default;
  GMState(const Box& box, int halo)
      : u(box, halo), adv_prev(box, halo), p_half(box, halo, Stagger::Center), psi_half(box, halo, Stagger::Center) {}
};

/// Handles a fluid step needs besides its state.
struct FluidContext {
  Comm& comm;
  const Partition& part;
  FactorizationCache& cache;
  PhaseTimes* times = nullptr;

  double h() const { return part.grid().h; }
};

/// Axis order used at a given step.
inline std::vector<int> sweep_order(int dim, long step_index, bool rotate) {
  std::vector<int> order(dim);
  for (int a = 0; a < dim; ++a) order[a] = a;
  if (rotate && step_index % 2 == 1) std::reverse(order.begin(), order.end());
  return order;
}

/// N^{n+1/2} from N(u^n) (`adv_now`) and the stored N(u^{n-1}).
inline void extrapolate_advection(const GMState& s, const MacField& adv_now, MacField& out) {
  if (out.dim != adv_now.dim || !out[0].same_shape(adv_now[0])) out = MacField(adv_now.box(), adv_now[0].halo());
  for (int d = 0; d < adv_now.dim; ++d) {
    const double* a = adv_now[d].data();
    const double* b = s.adv_prev[d].data();
    double* o = out[d].data();
    adv_now[d].for_each_interior([&](int i, int j, int k) {
      const auto q = adv_now[d].index(i, j, k);
      o[q] = s.step_index == 0 ? a[q] : 1.5 * a[q] - 0.5 * b[q];
    });
  }
}

/// p* = p^{n-1/2} + psi^{n-1/2}; zero at step 0. Interior only.
inline void predict_pressure(const GMState& s, Field& out) {
  if (!out.same_shape(s.p_half)) out = Field(s.p_half.box(), s.p_half.halo(), Stagger::Center);
  out.fill(0.0);
  if (s.step_index == 0) return;
  const double* p = s.p_half.data();
  const double* q = s.psi_half.data();
  double* o = out.data();
  out.for_each_interior([&](int i, int j, int k) {
    const auto c = out.index(i, j, k);
    o[c] = p[c] + q[c];
  });
}

/// u* from u^n (halo current), N^{n+1/2}, f^{n+1/2} and p* (halo current).
inline void explicit_momentum(const GMState& s, const MacField& n_half, const MacField& f_half, const Field& p_star,
                              const GMParams& prm, double h, MacField& out) {
  const int dim = s.u.dim;
  if (out.dim != dim || !out[0].same_shape(s.u[0])) out = MacField(s.u.box(), s.u[0].halo());
  MacField grad;
  gradient_center_to_edge(p_star, h, grad);
  Field lap;
  const double c = prm.dt / prm.rho;
  for (int d = 0; d < dim; ++d) {
    laplacian(s.u[d], h, lap);
    const double* un = s.u[d].data();
    const double* l = lap.data();
    const double* g = grad[d].data();
    const double* f = f_half[d].data();
    const double* nh = n_half[d].data();
    double* o = out[d].data();
    s.u[d].for_each_interior([&](int i, int j, int k) {
      const auto q = s.u[d].index(i, j, k);
      o[q] = un[q] + c * (prm.mu * l[q] - g[q] + f[q] - prm.rho * nh[q]);
    });
  }
}

/// One implicit viscous sweep along `axis`, in place on `u_io`:
/// (1 - kappa D_aa) u_out = u_in - kappa D_aa u^n. `u_n` needs a current halo.
inline void viscous_sweep(FluidContext& ctx, MacField& u_io, const MacField& u_n, int axis, const GMParams& prm) {
  const double h = ctx.h();
  const double kappa = prm.mu * prm.dt / (2.0 * prm.rho);
  const double k = kappa / (h * h);
  Field dd;
  for (int d = 0; d < u_io.dim; ++d) {
    second_difference(u_n[d], axis, h, dd);
    const double* a = dd.data();
    double* o = u_io[d].data();
    u_io[d].for_each_interior([&](int i, int j, int kk) {
      const auto q = u_io[d].index(i, j, kk);
      o[q] -= kappa * a[q];
    });
    batch_line_solve(ctx.comm, ctx.part, ctx.cache, u_io[d], axis, 1.0 + 2.0 * k, -k);
  }
}

/// psi with prod_a (1 - D_aa) psi = -(rho/dt) D u^{n+1}; `div_np1` holds
/// D u^{n+1}. Factors applied in `order`.
inline void pressure_correction_solve(FluidContext& ctx, const Field& div_np1, const GMParams& prm,
                                      const std::vector<int>& order, Field& psi) {
  const double h = ctx.h();
  if (!psi.same_shape(div_np1)) psi = Field(div_np1.box(), div_np1.halo(), Stagger::Center);
  psi.fill(0.0);
  const double c = -prm.rho / prm.dt;
  const double* dv = div_np1.data();
  double* o = psi.data();
  psi.for_each_interior([&](int i, int j, int k) {
    const auto q = psi.index(i, j, k);
    o[q] = c * dv[q];
  });
  const double inv_h2 = 1.0 / (h * h);
  for (int axis : order) batch_line_solve(ctx.comm, ctx.part, ctx.cache, psi, axis, 1.0 + 2.0 * inv_h2, -inv_h2);
}

/// p^{n+1/2} = p^{n-1/2} + psi - chi mu (D u^{n+1} + D u^n) / 2.
inline void update_pressure(const GMState& s, const Field& div_np1, const Field& div_n, const Field& psi,
                            const GMParams& prm, Field& out) {
  if (!out.same_shape(s.p_half)) out = Field(s.p_half.box(), s.p_half.halo(), Stagger::Center);
  const double* p = s.p_half.data();
  const double* a = div_np1.data();
  const double* b = div_n.data();
  const double* q = psi.data();
  double* o = out.data();
  const double c = prm.chi * prm.mu * 0.5;
  out.for_each_interior([&](int i, int j, int k) {
    const auto x = out.index(i, j, k);
    o[x] = p[x] + q[x] - c * (a[x] + b[x]);
  });
}

/// h^d-weighted l2 norm of a centre field over all workers.
inline double global_l2(Comm& comm, const Field& f, double h) {
  double acc = 0.0;
  const double* d = f.data();
  f.for_each_interior([&](int i, int j, int k) {
    const double v = d[f.index(i, j, k)];
    acc += v * v;
  });
  return std::sqrt(comm.allreduce_sum(acc) * std::pow(h, f.dim()));
}

/// Advances the state by one step. `f_half` is the spread force at
/// t^{n+1/2}; only its interior is read. On return the halo of `s.u` is
/// current.
inline void gm_step(FluidContext& ctx, GMState& s, const MacField& f_half, const GMParams& prm) {
  const double h = ctx.h();
  const int dim = s.u.dim;
  const std::vector<int> order = sweep_order(dim, s.step_index, prm.rotate);

  MacField adv_now, n_half, u_next;
  Field p_star, div_n;
  {
    ScopedPhase t(ctx.times, Phase::Explicit);
    exchange_halo(ctx.comm, ctx.part, s.u);
    advection_skew(s.u, h, adv_now);
    extrapolate_advection(s, adv_now, n_half);
    predict_pressure(s, p_star);
    exchange_halo(ctx.comm, ctx.part, p_star);
    explicit_momentum(s, n_half, f_half, p_star, prm, h, u_next);
    divergence_edge_to_center(s.u, h, div_n);
  }
  {
    ScopedPhase t(ctx.times, Phase::Sweeps);
    for (int axis : order) viscous_sweep(ctx, u_next, s.u, axis, prm);
  }
  Field div_np1, psi, p_next;
  {
    ScopedPhase t(ctx.times, Phase::PsiSolve);
    exchange_halo(ctx.comm, ctx.part, u_next);
    divergence_edge_to_center(u_next, h, div_np1);
    pressure_correction_solve(ctx, div_np1, prm, order, psi);
  }
  {
    ScopedPhase t(ctx.times, Phase::Pressure);
    update_pressure(s, div_np1, div_n, psi, prm, p_next);
    s.p_half = std::move(p_next);
    s.psi_half = std::move(psi);
    s.adv_prev = std::move(adv_now);
    s.u = std::move(u_next);
    ++s.step_index;
  }
}

}  // namespace ibgm
