#pragma once

/// @file grid.hpp
/// @brief Periodic uniform MAC grid: geometry, halo-padded fields and the
/// staggered velocity container.
///
/// Storage convention (all fields): three logical axes are always present;
/// in 2D the z extent is 1 with no halo. Interior indices run over
/// [0, n) per axis, halo indices over [-halo, 0) and [n, n + halo). The
/// linear layout is x fastest: offset = i + sx * (j + sy * k).
///
/// Sample locations, for global cell index (i, j, k) and mesh width h:
///   Center : ((i+1/2)h, (j+1/2)h, (k+1/2)h)
///   EdgeX  : (i h,      (j+1/2)h, (k+1/2)h)   u component
///   EdgeY  : ((i+1/2)h, j h,      (k+1/2)h)   v component
///   EdgeZ  : ((i+1/2)h, (j+1/2)h, k h)        w component

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibgm/errors.hpp"

namespace ibgm {

using Vec3 = std::array<double, 3>;

enum class Stagger { Center, EdgeX, EdgeY, EdgeZ };

inline Stagger edge_stagger(int axis) {
  switch (axis) {
    case 0: return Stagger::EdgeX;
    case 1: return Stagger::EdgeY;
    case 2: return Stagger::EdgeZ;
  }
  throw std::invalid_argument("edge_stagger: axis out of range");
}

inline const char* stagger_name(Stagger s) {
  switch (s) {
    case Stagger::Center: return "center";
    case Stagger::EdgeX: return "edge_x";
    case Stagger::EdgeY: return "edge_y";
    case Stagger::EdgeZ: return "edge_z";
  }
  return "?";
}

/// Offset of the sample point inside its cell along `axis`, in cells.
inline double stagger_offset(Stagger s, int axis) {
  if (s == Stagger::EdgeX && axis == 0) return 0.0;
  if (s == Stagger::EdgeY && axis == 1) return 0.0;
  if (s == Stagger::EdgeZ && axis == 2) return 0.0;
  return 0.5;
}

/// Global grid geometry. Cell counts may differ per axis (tiled domains)
/// but the mesh width h is shared.
struct GridSpec {
  int dim = 2;
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> length{1.0, 1.0, 1.0};
  double h = 1.0;

  static GridSpec square(int dim, int n, double side) {
    GridSpec g;
    g.dim = dim;
    g.h = side / n;
    for (int d = 0; d < 3; ++d) {
      g.cells[d] = d < dim ? n : 1;
      g.length[d] = d < dim ? side : g.h;
    }
    g.validate();
    return g;
  }

  /// Equal mesh width, per-axis cell counts; lengths are cells * h.
  static GridSpec tiled(int dim, std::array<int, 3> cells, double h) {
    GridSpec g;
    g.dim = dim;
    g.h = h;
    for (int d = 0; d < 3; ++d) {
      g.cells[d] = d < dim ? cells[d] : 1;
      g.length[d] = g.cells[d] * h;
    }
    g.validate();
    return g;
  }

  void validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("grid dimension must be 2 or 3");
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    for (int d = 0; d < dim; ++d) {
      if (cells[d] < 4)
        throw ConfigError("grid needs at least 4 cells per axis for the delta kernel");
      if (std::abs(cells[d] * h - length[d]) > 1e-14 * length[d])
        throw ConfigError("grid length is not cells * h");
    }
  }

  int n() const { return cells[0]; }
  double cell_volume() const { return std::pow(h, dim); }
  std::size_t total_cells() const {
    return static_cast<std::size_t>(cells[0]) * cells[1] * cells[2];
  }

  /// Physical coordinate of the sample with global index `idx` along `axis`.
  double coord(Stagger s, int axis, int idx) const {
    return (idx + stagger_offset(s, axis)) * h;
  }
};

/// A rectangular block of global cells [lo, lo + n).
struct Box {
  int dim = 2;
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> n{1, 1, 1};

  static Box whole(const GridSpec& g) {
    Box b;
    b.dim = g.dim;
    b.n = g.cells;
    return b;
  }
  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  bool contains_cell(int axis, int global) const {
    return global >= lo[axis] && global < lo[axis] + n[axis];
  }
};

/// Scalar samples on one stagger location over a box plus a halo.
class Field {
 public:
  Field() = default;
  Field(const Box& box, int halo, Stagger loc) : box_(box), loc_(loc) {
    for (int d = 0; d < 3; ++d) g_[d] = d < box.dim ? halo : 0;
    sx_ = box.n[0] + 2 * g_[0];
    sy_ = box.n[1] + 2 * g_[1];
    const int sz = box.n[2] + 2 * g_[2];
    data_.assign(static_cast<std::size_t>(sx_) * sy_ * sz, 0.0);
  }

  const Box& box() const { return box_; }
  int dim() const { return box_.dim; }
  int extent(int axis) const { return box_.n[axis]; }
  int halo() const { return g_[0]; }
  Stagger location() const { return loc_; }
  void set_location(Stagger s) { loc_ = s; }

  std::ptrdiff_t index(int i, int j, int k = 0) const {
    return (i + g_[0]) + static_cast<std::ptrdiff_t>(sx_) * ((j + g_[1]) + static_cast<std::ptrdiff_t>(sy_) * (k + g_[2]));
  }
  std::ptrdiff_t stride(int axis) const {
    return axis == 0 ? 1 : axis == 1 ? sx_ : static_cast<std::ptrdiff_t>(sx_) * sy_;
  }

  double& operator()(int i, int j, int k = 0) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k = 0) const { return data_[index(i, j, k)]; }
  double& at(const std::array<int, 3>& c) { return data_[index(c[0], c[1], c[2])]; }
  double at(const std::array<int, 3>& c) const { return data_[index(c[0], c[1], c[2])]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  bool same_shape(const Field& o) const {
    return box_.dim == o.box_.dim && box_.n == o.box_.n && box_.lo == o.box_.lo && g_ == o.g_;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  /// Visits every interior cell in storage order.
  template <class F>
  void for_each_interior(F&& f) const {
    for (int k = 0; k < box_.n[2]; ++k)
      for (int j = 0; j < box_.n[1]; ++j)
        for (int i = 0; i < box_.n[0]; ++i) f(i, j, k);
  }

  /// Fills the halo by periodic wrap of this field's own interior. Only
  /// meaningful when the box spans the whole grid along every axis.
  void fill_periodic_halo() {
    const int nx = box_.n[0], ny = box_.n[1], nz = box_.n[2];
    for (int k = -g_[2]; k < nz + g_[2]; ++k)
      for (int j = -g_[1]; j < ny + g_[1]; ++j)
        for (int i = -g_[0]; i < nx + g_[0]; ++i) {
          const bool interior = i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
          if (interior) continue;
          (*this)(i, j, k) = (*this)(wrap(i, nx), wrap(j, ny), wrap(k, nz));
        }
  }

  /// Copies the interior into a dense array (x fastest).
  std::vector<double> interior_values() const {
    std::vector<double> out;
    out.reserve(box_.size());
    for_each_interior([&](int i, int j, int k) { out.push_back((*this)(i, j, k)); });
    return out;
  }
  void set_interior(std::span<const double> v) {
    if (v.size() != box_.size()) throw std::invalid_argument("set_interior: size mismatch");
    std::size_t q = 0;
    for_each_interior([&](int i, int j, int k) { (*this)(i, j, k) = v[q++]; });
  }

  static int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
  }

 private:
  Box box_{};
  Stagger loc_ = Stagger::Center;
  std::array<int, 3> g_{0, 0, 0};
  int sx_ = 1;
  int sy_ = 1;
  std::vector<double> data_;
};

/// Staggered velocity-like vector field: component d lives on Edge(d).
struct MacField {
  int dim = 2;
  std::array<Field, 3> comp;

  MacField() = default;
  MacField(const Box& box, int halo) : dim(box.dim) {
    for (int d = 0; d < dim; ++d) comp[d] = Field(box, halo, edge_stagger(d));
  }
  Field& operator[](int d) { return comp[d]; }
  const Field& operator[](int d) const { return comp[d]; }
  const Box& box() const { return comp[0].box(); }

  void fill(double v) {
    for (int d = 0; d < dim; ++d) comp[d].fill(v);
  }
  void fill_periodic_halo() {
    for (int d = 0; d < dim; ++d) comp[d].fill_periodic_halo();
  }
};

inline void require_location(const Field& f, Stagger s, const char* what) {
  if (f.location() != s)
    throw std::invalid_argument(std::string(what) + ": expected " + stagger_name(s) +
                                " input, got " + stagger_name(f.location()));
}

}  // namespace ibgm
