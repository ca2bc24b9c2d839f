#pragma once

/// @file line_solver.hpp
/// @brief Batched constant-coefficient periodic line solves on a partitioned
/// field.
///
/// Every interior line of a field along one axis is one periodic tridiagonal
/// system. With a single worker along the axis each line is solved directly.
/// Otherwise the lines are split into per-worker blocks and solved with the
/// Schur decomposition: local eliminations, one aggregated gather per
/// (worker, master) pair, the interface solve at the line master, one
/// aggregated scatter back, then local corrections. Line l is mastered by
/// the row member at position l mod P.

#include <array>
#include <cstddef>
#include <vector>

#include "ibgm/comm.hpp"
#include "ibgm/grid.hpp"
#include "ibgm/partition.hpp"
#include "ibgm/tridiag.hpp"

namespace ibgm {

/// Start pointers of every interior line along `axis`, in a fixed order
/// shared by all workers of a row.
inline std::vector<double*> interior_lines(Field& f, int axis) {
  std::array<int, 3> n{f.extent(0), f.extent(1), f.extent(2)};
  const int t1 = axis == 0 ? 1 : 0;
  const int t2 = axis == 2 ? 1 : 2;
  std::vector<double*> out;
  out.reserve(static_cast<std::size_t>(n[t1]) * n[t2]);
  std::array<int, 3> idx{0, 0, 0};
  for (int b = 0; b < n[t2]; ++b)
    for (int a = 0; a < n[t1]; ++a) {
      idx[t1] = a;
      idx[t2] = b;
      idx[axis] = 0;
      out.push_back(f.data() + f.index(idx[0], idx[1], idx[2]));
    }
  return out;
}

/// Master position (within the row) of line `line` for a row of `row_size`.
inline int line_master(std::size_t line, int row_size) { return static_cast<int>(line % row_size); }

/// Solves (diag, off, off) periodic systems along `axis` for every interior
/// line of `f`, in place. Collective over the worker row along `axis`.
inline void batch_line_solve(Comm& comm, const Partition& part, FactorizationCache& cache, Field& f, int axis,
                             double diag, double off) {
  const int P = part.workers()[axis];
  const int N = part.grid().cells[axis];
  auto fact = cache.get(axis, diag, off, N, equal_blocks(N, P));
  const std::ptrdiff_t s = f.stride(axis);
  const std::vector<double*> lines = interior_lines(f, axis);

  if (P == 1) {
    const CyclicFactor& cf = fact->serial_factor();
    for (double* x : lines) cf.solve_strided(x, s);
    return;
  }

  const int me = comm.rank();
  const int pos = part.coords(me)[axis];
  const std::vector<int> row = part.row(me, axis);

  // Local elimination and gather, one message per master.
  std::vector<Writer> to_master(P);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto g = fact->local_stage(pos, lines[l], s);
    Writer& w = to_master[line_master(l, P)];
    w.put(g.first);
    w.put(g.last);
    w.put(g.g);
  }
  for (int m = 0; m < P; ++m) comm.send(row[m], tags::kLineGather + axis, to_master[m].take());

  // Interface solves for the lines this worker masters.
  std::vector<Message> gathered(P);
  for (int q = 0; q < P; ++q) gathered[q] = comm.recv(row[q], tags::kLineGather + axis);
  {
    std::vector<Reader> rd;
    rd.reserve(P);
    for (int q = 0; q < P; ++q) rd.emplace_back(gathered[q]);
    std::vector<Writer> to_member(P);
    std::vector<SchurFactorization::Gathered> gs(P);
    std::vector<double> y(P);
    for (std::size_t l = pos; l < lines.size(); l += P) {
      for (int q = 0; q < P; ++q) {
        gs[q].first = rd[q].get<double>();
        gs[q].last = rd[q].get<double>();
        gs[q].g = rd[q].get<double>();
      }
      fact->interface_solve(gs, y);
      for (int q = 0; q < P; ++q) {
        to_member[q].put(y[q]);
        to_member[q].put(y[(q + 1) % P]);
      }
    }
    for (int q = 0; q < P; ++q) {
      if (!rd[q].done()) throw ProtocolError("line gather size mismatch");
      comm.send(row[q], tags::kLineScatter + axis, to_member[q].take());
    }
  }

  // Corrections with the scattered interface values.
  std::vector<Message> scattered(P);
  for (int m = 0; m < P; ++m) scattered[m] = comm.recv(row[m], tags::kLineScatter + axis);
  std::vector<Reader> rd;
  rd.reserve(P);
  for (int m = 0; m < P; ++m) rd.emplace_back(scattered[m]);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    Reader& r = rd[line_master(l, P)];
    const double y_self = r.get<double>();
    const double y_next = r.get<double>();
    fact->correct(pos, lines[l], s, y_self, y_next);
  }
  for (auto& r : rd)
    if (!r.done()) throw ProtocolError("line scatter size mismatch");
}

}  // namespace ibgm
