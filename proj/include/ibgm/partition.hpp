#pragma once

/// @file partition.hpp
/// @brief Block partition of the periodic grid over a torus of workers and
/// the ghost-cell (halo) exchange for Eulerian fields.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ibgm/comm.hpp"
#include "ibgm/errors.hpp"
#include "ibgm/grid.hpp"

namespace ibgm {

/// Width of the ghost region: the support radius of the delta kernel.
inline constexpr int kHaloWidth = 2;

class Partition {
 public:
  Partition() = default;

  static Partition make(const GridSpec& g, std::array<int, 3> workers, int halo = kHaloWidth) {
    Partition p;
    p.grid_ = g;
    p.halo_ = halo;
    for (int d = 0; d < 3; ++d) {
      const int w = d < g.dim ? workers[d] : 1;
      if (w < 1) throw ConfigError("worker grid dimensions must be positive");
      if (g.cells[d] % w != 0)
        throw ConfigError("cells along axis " + std::to_string(d) + " (" + std::to_string(g.cells[d]) +
                          ") not divisible by " + std::to_string(w) + " workers");
      p.workers_[d] = w;
      p.local_[d] = g.cells[d] / w;
      if (d < g.dim && p.local_[d] < 2 * halo)
        throw ConfigError("subdomain has fewer than " + std::to_string(2 * halo) + " cells along axis " +
                          std::to_string(d));
    }
    return p;
  }

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  int halo() const { return halo_; }
  int size() const { return workers_[0] * workers_[1] * workers_[2]; }
  const std::array<int, 3>& workers() const { return workers_; }
  const std::array<int, 3>& local_cells() const { return local_; }

  std::array<int, 3> coords(int rank) const {
    return {rank % workers_[0], (rank / workers_[0]) % workers_[1], rank / (workers_[0] * workers_[1])};
  }
  int rank_of(std::array<int, 3> c) const {
    for (int d = 0; d < 3; ++d) c[d] = Field::wrap(c[d], workers_[d]);
    return c[0] + workers_[0] * (c[1] + workers_[1] * c[2]);
  }
  Box box(int rank) const {
    Box b;
    b.dim = grid_.dim;
    const auto c = coords(rank);
    for (int d = 0; d < 3; ++d) {
      b.lo[d] = c[d] * local_[d];
      b.n[d] = local_[d];
    }
    return b;
  }
  int neighbor(int rank, int axis, int dir) const {
    auto c = coords(rank);
    c[axis] += dir;
    return rank_of(c);
  }
  /// Ranks sharing this rank's transverse coordinates, ordered along `axis`.
  std::vector<int> row(int rank, int axis) const {
    auto c = coords(rank);
    std::vector<int> out(workers_[axis]);
    for (int q = 0; q < workers_[axis]; ++q) {
      c[axis] = q;
      out[q] = rank_of(c);
    }
    return out;
  }
  /// Owner of a canonical (wrapped) position; half-open boxes.
  int owner_of(const Vec3& x_wrapped) const {
    std::array<int, 3> c{0, 0, 0};
    for (int d = 0; d < grid_.dim; ++d) {
      int cell = static_cast<int>(std::floor(x_wrapped[d] / grid_.h));
      if (cell < 0) cell = 0;
      if (cell >= grid_.cells[d]) cell = grid_.cells[d] - 1;
      c[d] = cell / local_[d];
    }
    return rank_of(c);
  }

 private:
  GridSpec grid_{};
  std::array<int, 3> workers_{1, 1, 1};
  std::array<int, 3> local_{1, 1, 1};
  int halo_ = kHaloWidth;
};

namespace detail {

/// Visits storage indices of the slab [from, from + width) along `axis` and
/// the full stored range along every other axis.
template <class F>
void for_each_slab(const Field& f, int axis, int from, int width, F&& fn) {
  std::array<int, 3> lo{}, hi{};
  for (int d = 0; d < 3; ++d) {
    const int g = d < f.dim() ? f.halo() : 0;
    lo[d] = -g;
    hi[d] = f.extent(d) + g;
  }
  lo[axis] = from;
  hi[axis] = from + width;
  for (int k = lo[2]; k < hi[2]; ++k)
    for (int j = lo[1]; j < hi[1]; ++j)
      for (int i = lo[0]; i < hi[0]; ++i) fn(f.index(i, j, k));
}

}  // namespace detail

/// Fills the halos of `fields` (all on the same box) from the neighbours'
/// interiors, axis by axis so that edge and corner regions come out right.
/// One message per direction per axis carries every field.
inline void exchange_halo(Comm& comm, const Partition& part, std::span<Field* const> fields) {
  if (fields.empty()) return;
  const int g = fields[0]->halo();
  const int me = comm.rank();
  for (int axis = 0; axis < part.dim(); ++axis) {
    const int n = fields[0]->extent(axis);
    const int lower = part.neighbor(me, axis, -1);
    const int upper = part.neighbor(me, axis, +1);
    // dir 0: my first g interior layers go to the lower neighbour's upper halo.
    for (int dir = 0; dir < 2; ++dir) {
      Writer w;
      const int from = dir == 0 ? 0 : n - g;
      for (Field* f : fields) {
        const double* src = f->data();
        detail::for_each_slab(*f, axis, from, g, [&](std::ptrdiff_t q) { w.put(src[q]); });
      }
      comm.send(dir == 0 ? lower : upper, tags::kHalo + 2 * axis + dir, w.take());
    }
    for (int dir = 0; dir < 2; ++dir) {
      const int src_rank = dir == 0 ? upper : lower;
      Message m = comm.recv(src_rank, tags::kHalo + 2 * axis + dir);
      Reader rd(m);
      const int into = dir == 0 ? n : -g;
      for (Field* f : fields) {
        double* dst = f->data();
        detail::for_each_slab(*f, axis, into, g, [&](std::ptrdiff_t q) { dst[q] = rd.get<double>(); });
      }
      if (!rd.done()) throw ProtocolError("halo message size mismatch (topology mismatch)");
    }
  }
}

inline void exchange_halo(Comm& comm, const Partition& part, Field& f) {
  Field* fs[] = {&f};
  exchange_halo(comm, part, fs);
}

inline void exchange_halo(Comm& comm, const Partition& part, MacField& u) {
  std::vector<Field*> fs;
  for (int d = 0; d < u.dim; ++d) fs.push_back(&u[d]);
  exchange_halo(comm, part, fs);
}

}  // namespace ibgm
