#pragma once

/// @file diagnostics.hpp
/// @brief Whole-grid solution snapshots, restriction between nested grids,
/// discrete l2 errors, convergence rates and membrane diagnostics.
///
/// Restriction from a grid refined by `ratio` (a power of two, applied as
/// repeated 2:1 steps):
///   centre fields   average of the 2^d fine cells inside the coarse cell
///   edge component  injection along its own axis (fine and coarse edges
///                   coincide), two-point average along the other axes
///   Lagrangian      decimation in s (coarse k <-> fine 2k); see RingRule
///                   for stacks of fibers

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ibgm/grid.hpp"
#include "ibgm/ib_structure.hpp"

namespace ibgm {

/// Dense copy of a solution on the whole grid (x-fastest arrays).
struct GlobalFields {
  GridSpec grid;
  double time = 0.0;
  long step = 0;
  std::array<std::vector<double>, 3> u;  // u[d] on Edge(d)
  std::vector<double> p;                 // centre
  std::vector<Vec3> X;                   // Lagrangian positions by id
  std::vector<Vec3> U;                   // Lagrangian velocities by id
};

namespace detail {

inline std::size_t dense_index(const GridSpec& g, int i, int j, int k) {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(g.cells[0]) * (j + static_cast<std::size_t>(g.cells[1]) * k);
}

inline GridSpec coarsen(const GridSpec& g) {
  std::array<int, 3> c = g.cells;
  for (int d = 0; d < g.dim; ++d) {
    if (c[d] % 2 != 0) throw std::invalid_argument("grids are not nested");
    c[d] /= 2;
  }
  return GridSpec::tiled(g.dim, c, 2.0 * g.h);
}

/// One 2:1 restriction of a field at `loc`.
inline std::vector<double> restrict_half(const GridSpec& fine, std::span<const double> f, Stagger loc) {
  const GridSpec coarse = coarsen(fine);
  std::vector<double> out(coarse.total_cells());
  const int dim = fine.dim;
  for (int k = 0; k < coarse.cells[2]; ++k)
    for (int j = 0; j < coarse.cells[1]; ++j)
      for (int i = 0; i < coarse.cells[0]; ++i) {
        std::array<int, 3> c{i, j, k};
        double acc = 0.0;
        int count = 0;
        const int kr = dim == 3 ? 2 : 1;
        for (int dz = 0; dz < kr; ++dz)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const std::array<int, 3> o{dx, dy, dz};
              bool skip = false;
              std::array<int, 3> fi{};
              for (int a = 0; a < 3; ++a) {
                const bool aligned = stagger_offset(loc, a) == 0.0 && a < dim;
                if (aligned && o[a] == 1) skip = true;
                fi[a] = a < dim ? 2 * c[a] + o[a] : 0;
              }
              if (skip) continue;
              acc += f[dense_index(fine, fi[0], fi[1], fi[2])];
              ++count;
            }
        out[dense_index(coarse, i, j, k)] = acc / count;
      }
  return out;
}

inline int log2_ratio(int ratio) {
  int r = 0;
  while ((1 << r) < ratio) ++r;
  if ((1 << r) != ratio) throw std::invalid_argument("refinement ratio must be a power of two");
  return r;
}

}  // namespace detail

inline std::vector<double> restrict_field(const GridSpec& fine, std::span<const double> f, Stagger loc, int ratio) {
  std::vector<double> cur(f.begin(), f.end());
  GridSpec g = fine;
  for (int r = detail::log2_ratio(ratio); r > 0; --r) {
    cur = detail::restrict_half(g, cur, loc);
    g = detail::coarsen(g);
  }
  return cur;
}

/// How fibers stacked across a second parameter map between levels.
enum class RingRule {
  Fixed,     // fiber count independent of N (ellipse arrays)
  Decimate,  // fibers at r_j = j h_r: coarse j <-> fine 2j
  Midpoint,  // fibers at r_j = (j + 1/2) h_r: average of fine 2j, 2j + 1
};

/// Restriction of Lagrangian positions laid out as `rings` fibers of `ns`
/// points each (id = ring * ns + k); s is always decimated.
inline std::vector<Vec3> restrict_points(std::span<const Vec3> X, int ns, int rings, int ratio, RingRule rule,
                                         const GridSpec& g) {
  std::vector<Vec3> cur(X.begin(), X.end());
  if (cur.size() != static_cast<std::size_t>(ns) * rings)
    throw std::invalid_argument("restrict_points: layout does not match point count");
  for (int r = detail::log2_ratio(ratio); r > 0; --r) {
    if (ns % 2 != 0) throw std::invalid_argument("fiber point count not nested");
    const int cns = ns / 2;
    int crings = rings;
    if (rule != RingRule::Fixed) {
      if (rings % 2 != 0) throw std::invalid_argument("fiber count not nested");
      crings = rings / 2;
    }
    std::vector<Vec3> next(static_cast<std::size_t>(cns) * crings);
    for (int j = 0; j < crings; ++j)
      for (int k = 0; k < cns; ++k) {
        Vec3 v;
        if (rule == RingRule::Midpoint) {
          const Vec3& a = cur[static_cast<std::size_t>(2 * j) * ns + 2 * k];
          const Vec3& b = cur[static_cast<std::size_t>(2 * j + 1) * ns + 2 * k];
          Vec3 d = min_image({b[0] - a[0], b[1] - a[1], b[2] - a[2]}, g);
          for (int a2 = 0; a2 < 3; ++a2) v[a2] = a[a2] + 0.5 * d[a2];
        } else {
          const int fj = rule == RingRule::Fixed ? j : 2 * j;
          v = cur[static_cast<std::size_t>(fj) * ns + 2 * k];
        }
        next[static_cast<std::size_t>(j) * cns + k] = v;
      }
    cur = std::move(next);
    ns = cns;
    rings = crings;
  }
  return cur;
}

/// (h^d sum |a - b|^2)^{1/2} over dense arrays.
inline double l2_diff(std::span<const double> a, std::span<const double> b, double cell_volume) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_diff: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc * cell_volume);
}

inline double l2_norm(std::span<const double> a, double cell_volume) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc * cell_volume);
}

/// (w sum_k |X_k - Y_k|^2)^{1/2} with periodic minimum-image distances.
inline double lagrangian_l2_diff(std::span<const Vec3> a, std::span<const Vec3> b, double weight, const GridSpec& g) {
  if (a.size() != b.size()) throw std::invalid_argument("lagrangian_l2_diff: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec3 d = min_image({a[i][0] - b[i][0], a[i][1] - b[i][1], a[i][2] - b[i][2]}, g);
    acc += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  }
  return std::sqrt(acc * weight);
}

/// Errors of a coarse solution against a finer one restricted onto it.
struct SolutionError {
  double u = 0.0;
  double p = 0.0;
  double X = 0.0;
};

/// Lagrangian layout needed to restrict positions.
struct LagrangianLayout {
  int ns = 0;
  int rings = 1;
  RingRule rule = RingRule::Fixed;
  double weight = 1.0;  // coarse quadrature weight
};

inline SolutionError compute_error(const GlobalFields& coarse, const GlobalFields& fine, const LagrangianLayout& lag) {
  const GridSpec& gc = coarse.grid;
  const GridSpec& gf = fine.grid;
  if (gf.dim != gc.dim) throw std::invalid_argument("compute_error: dimension mismatch");
  const int ratio = static_cast<int>(std::lround(gc.h / gf.h));
  for (int d = 0; d < gc.dim; ++d)
    if (gf.cells[d] != ratio * gc.cells[d]) throw std::invalid_argument("compute_error: grids are not nested");
  SolutionError e;
  const double vol = gc.cell_volume();
  double acc = 0.0;
  for (int d = 0; d < gc.dim; ++d) {
    const auto r = restrict_field(gf, fine.u[d], edge_stagger(d), ratio);
    const double v = l2_diff(coarse.u[d], r, vol);
    acc += v * v;
  }
  e.u = std::sqrt(acc);
  e.p = l2_diff(coarse.p, restrict_field(gf, fine.p, Stagger::Center, ratio), vol);
  if (!coarse.X.empty()) {
    const int fine_ns = lag.ns * ratio;
    const int fine_rings = lag.rule == RingRule::Fixed ? lag.rings : lag.rings * ratio;
    const auto xr = restrict_points(fine.X, fine_ns, fine_rings, ratio, lag.rule, gf);
    e.X = lagrangian_l2_diff(coarse.X, xr, lag.weight, gc);
  }
  return e;
}

/// log2 of the ratio of successive differences; empty when undefined.
inline std::optional<double> convergence_rate(double diff_coarse, double diff_fine) {
  if (!(diff_fine > 0.0) || !(diff_coarse > 0.0) || !std::isfinite(diff_coarse) || !std::isfinite(diff_fine))
    return std::nullopt;
  return std::log2(diff_coarse / diff_fine);
}

/// Shoelace area of a closed polygon in the (a0, a1) plane; consecutive
/// edges use minimum-image displacements so wrapped positions are fine.
inline double enclosed_area(std::span<const Vec3> pts, const GridSpec& g, std::array<int, 2> plane = {0, 1}) {
  if (pts.size() < 3) throw std::invalid_argument("enclosed_area needs at least 3 points");
  const int a = plane[0], b = plane[1];
  std::vector<std::array<double, 2>> q(pts.size());
  q[0] = {pts[0][a], pts[0][b]};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    Vec3 d{};
    for (int c = 0; c < 3; ++c) d[c] = pts[i][c] - pts[i - 1][c];
    d = min_image(d, g);
    q[i] = {q[i - 1][0] + d[a], q[i - 1][1] + d[b]};
  }
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto& p0 = q[i];
    const auto& p1 = q[(i + 1) % q.size()];
    s += p0[0] * p1[1] - p1[0] * p0[1];
  }
  return 0.5 * std::abs(s);
}

struct RadiusStats {
  double max = 0.0;
  double mean = 0.0;
};

inline RadiusStats radius_stats(std::span<const Vec3> pts, const Vec3& center, const GridSpec& g,
                                std::array<int, 2> plane = {0, 1}) {
  RadiusStats r;
  if (pts.empty()) return r;
  for (const auto& x : pts) {
    Vec3 d{};
    for (int c = 0; c < 3; ++c) d[c] = x[c] - center[c];
    d = min_image(d, g);
    const double rad = std::hypot(d[plane[0]], d[plane[1]]);
    r.max = std::max(r.max, rad);
    r.mean += rad;
  }
  r.mean /= static_cast<double>(pts.size());
  return r;
}

/// Least-squares slope of y(t) over samples with t in [t0, t1].
inline double least_squares_slope(std::span<const double> t, std::span<const double> y, double t0, double t1) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 - 1e-12 || t[i] > t1 + 1e-12) continue;
    n += 1;
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double den = n * stt - st * st;
  if (n < 2 || den == 0.0) throw std::invalid_argument("least_squares_slope: fewer than two samples in range");
  return (n * sty - st * sy) / den;
}

}  // namespace ibgm
