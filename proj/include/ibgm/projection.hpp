#pragma once

/// @file projection.hpp
/// @brief Second-order pressure-increment projection solver used as the
/// incompressible baseline. Runs on a single worker owning the whole grid.
///
/// One step:
///   rhs  = u^n + dt/rho [mu/2 L u^n - G p^{n-1/2} + f - rho N^{n+1/2}]
///   (1 - mu dt/(2 rho) L) u* = rhs
///   L phi = (rho/dt) D u*            (zero-mean gauge)
///   u^{n+1} = u* - dt/rho G phi
///   p^{n+1/2} = p^{n-1/2} + phi - mu/2 D u*
/// Both implicit solves are exact discrete Fourier inversions of the
/// periodic 5-point (7-point) Laplacian symbol, so D u^{n+1} vanishes to
/// rounding.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "ibgm/errors.hpp"
#include "ibgm/gm_fluid.hpp"
#include "ibgm/grid.hpp"
#include "ibgm/operators.hpp"

namespace ibgm {

namespace detail {
/// FFTW planning is not thread safe.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-to-complex transforms over a whole periodic grid (x fastest) with
/// diagonal solves against the discrete Laplacian symbol.
class SpectralSolver {
 public:
  explicit SpectralSolver(const GridSpec& g) : g_(g) {
    n_real_ = g.total_cells();
    const int nx = g.cells[0];
    n_cplx_ = static_cast<std::size_t>(nx / 2 + 1) * g.cells[1] * g.cells[2];
    real_ = fftw_alloc_real(n_real_);
    cplx_ = fftw_alloc_complex(n_cplx_);
    if (!real_ || !cplx_) throw std::bad_alloc();
    std::vector<int> dims;
    if (g.dim == 3) dims.push_back(g.cells[2]);
    dims.push_back(g.cells[1]);
    dims.push_back(g.cells[0]);
    std::lock_guard lock(detail::fftw_plan_mutex());
    fwd_ = fftw_plan_dft_r2c(g.dim, dims.data(), real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(g.dim, dims.data(), cplx_, real_, FFTW_ESTIMATE);
    symbol_.resize(n_cplx_);
    std::size_t q = 0;
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int k = 0; k < g.cells[2]; ++k)
      for (int j = 0; j < g.cells[1]; ++j)
        for (int i = 0; i < nx / 2 + 1; ++i) {
          const std::array<int, 3> m{i, j, k};
          double lam = 0.0;
          for (int d = 0; d < g.dim; ++d) {
            const double s = std::sin(std::numbers::pi * m[d] / g.cells[d]);
            lam -= 4.0 * inv_h2 * s * s;
          }
          symbol_[q++] = lam;
        }
  }
  ~SpectralSolver() {
    std::lock_guard lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  /// Solves (1 - alpha L) x = f in place on the interior of `f`.
  void helmholtz(Field& f, double alpha) {
    apply(f, [alpha](double lam) { return 1.0 / (1.0 - alpha * lam); });
  }
  /// Solves L x = f with the zero mode of x set to zero.
  void poisson(Field& f) {
    apply(f, [](double lam) { return lam == 0.0 ? 0.0 : 1.0 / lam; });
  }

 private:
  template <class M>
  void apply(Field& f, M&& mult) {
    std::size_t q = 0;
    f.for_each_interior([&](int i, int j, int k) { real_[q++] = f(i, j, k); });
    fftw_execute(fwd_);
    const double norm = 1.0 / static_cast<double>(n_real_);
    for (std::size_t c = 0; c < n_cplx_; ++c) {
      const double m = mult(symbol_[c]) * norm;
      cplx_[c][0] *= m;
      cplx_[c][1] *= m;
    }
    fftw_execute(bwd_);
    q = 0;
    f.for_each_interior([&](int i, int j, int k) { f(i, j, k) = real_[q++]; });
  }

  GridSpec g_;
  std::size_t n_real_ = 0, n_cplx_ = 0;
  double* real_ = nullptr;
  fftw_complex* cplx_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  std::vector<double> symbol_;
};

struct BCMState {
  MacField u;
  MacField adv_prev;
  Field p_half;
  long step_index = 0;

  BCMState() = default;
  BCMState(const Box& box, int halo) : u(box, halo), adv_prev(box, halo), p_half(box, halo, Stagger::Center) {}
};

/// Advances the projection solver one step. The state must cover the whole
/// grid; halos are refreshed by periodic wrap.
inline void bcm_step(SpectralSolver& spec, BCMState& s, const MacField& f_half, const GMParams& prm, double h,
                     PhaseTimes* times = nullptr) {
  const int dim = s.u.dim;
  const double c = prm.dt / prm.rho;
  MacField adv_now, n_half, ustar;
  {
    ScopedPhase t(times, Phase::Explicit);
    s.u.fill_periodic_halo();
    advection_skew(s.u, h, adv_now);
    n_half = MacField(s.u.box(), s.u[0].halo());
    for (int d = 0; d < dim; ++d)
      adv_now[d].for_each_interior([&](int i, int j, int k) {
        n_half[d](i, j, k) = s.step_index == 0 ? adv_now[d](i, j, k)
                                               : 1.5 * adv_now[d](i, j, k) - 0.5 * s.adv_prev[d](i, j, k);
      });
    s.p_half.fill_periodic_halo();
    MacField grad;
    gradient_center_to_edge(s.p_half, h, grad);
    ustar = MacField(s.u.box(), s.u[0].halo());
    Field lap;
    for (int d = 0; d < dim; ++d) {
      laplacian(s.u[d], h, lap);
      s.u[d].for_each_interior([&](int i, int j, int k) {
        ustar[d](i, j, k) = s.u[d](i, j, k) + c * (0.5 * prm.mu * lap(i, j, k) - grad[d](i, j, k) +
                                                   f_half[d](i, j, k) - prm.rho * n_half[d](i, j, k));
      });
    }
  }
  {
    ScopedPhase t(times, Phase::Sweeps);
    const double alpha = prm.mu * prm.dt / (2.0 * prm.rho);
    for (int d = 0; d < dim; ++d) spec.helmholtz(ustar[d], alpha);
  }
  Field div, phi;
  {
    ScopedPhase t(times, Phase::PsiSolve);
    ustar.fill_periodic_halo();
    divergence_edge_to_center(ustar, h, div);
    phi = Field(div.box(), div.halo(), Stagger::Center);
    div.for_each_interior([&](int i, int j, int k) { phi(i, j, k) = div(i, j, k) / c; });
    spec.poisson(phi);
  }
  {
    ScopedPhase t(times, Phase::Pressure);
    phi.fill_periodic_halo();
    MacField gphi;
    gradient_center_to_edge(phi, h, gphi);
    for (int d = 0; d < dim; ++d)
      ustar[d].for_each_interior([&](int i, int j, int k) { ustar[d](i, j, k) -= c * gphi[d](i, j, k); });
    s.p_half.for_each_interior(
        [&](int i, int j, int k) { s.p_half(i, j, k) += phi(i, j, k) - 0.5 * prm.mu * div(i, j, k); });
    ustar.fill_periodic_halo();
    s.u = std::move(ustar);
    s.adv_prev = std::move(adv_now);
    ++s.step_index;
  }
}

}  // namespace ibgm
