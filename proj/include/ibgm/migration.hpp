#pragma once

/// @file migration.hpp
/// @brief Per-worker Lagrangian store and the ghost-region exchange of IB
/// points and force connections.
///
/// Each worker owns the points whose wrapped position lies in its half-open
/// box, and the connections centred on those points. Every step, after the
/// positions are advanced, each worker sends to every neighbour offset in
/// {-1,0,1}^d (itself included when the worker grid is thin along an axis):
///   - the points whose X^{n+1} or X^{n+1/2} lies within the receiver's box
///     grown by kPointMargin cells,
///   - the connections centred on points within kConnMargin cells,
///   - the endpoints of those connections that the sender owns.
/// A received copy is a ghost image keyed by (id, periodic wrap); its
/// positions are shifted into the receiver's frame. Force densities are
/// evaluated per connection and spread from every local image of the centre
/// point into interior cells only. Cleanup then keeps or adopts the points
/// whose wrapped X^{n+1} lies in the local box.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "ibgm/comm.hpp"
#include "ibgm/errors.hpp"
#include "ibgm/ib_structure.hpp"
#include "ibgm/partition.hpp"

namespace ibgm {

inline constexpr double kPointMargin = 3.0;
inline constexpr double kConnMargin = 2.0;

using Wrap = std::array<int, 3>;

struct GhostPoint {
  IBPoint p;  // positions already in the receiver's frame
  Wrap wrap{0, 0, 0};
  Vec3 X_sender{};  // X^{n+1} as the owner holds it, used for ownership
};

class IBStore {
 public:
  std::vector<IBPoint> residents;              // sorted by id
  std::vector<ForceConnection> connections;    // centre resident
  std::vector<GhostPoint> ghosts;              // valid between migrate and cleanup
  std::vector<ForceConnection> ghost_connections;

  /// Takes the points this worker owns from a global list; X is wrapped.
  void seed(const Partition& part, int rank, std::span<const IBPoint> points,
            std::span<const ForceConnection> conns) {
    residents.clear();
    connections.clear();
    for (IBPoint p : points) {
      p.X = wrap_position(p.X, part.grid());
      if (part.owner_of(p.X) == rank) residents.push_back(p);
    }
    sort_residents();
    for (const auto& c : conns)
      if (find_resident(c.point_id)) connections.push_back(c);
    sort_connections();
  }

  const IBPoint* find_resident(PointId id) const {
    auto it = std::lower_bound(residents.begin(), residents.end(), id,
                               [](const IBPoint& p, PointId v) { return p.id < v; });
    return it != residents.end() && it->id == id ? &*it : nullptr;
  }

  void sort_residents() {
    std::sort(residents.begin(), residents.end(), [](const IBPoint& a, const IBPoint& b) { return a.id < b.id; });
  }
  void sort_connections() {
    std::stable_sort(connections.begin(), connections.end(),
                     [](const ForceConnection& a, const ForceConnection& b) { return a.point_id < b.point_id; });
  }
};

namespace detail {

inline int offset_code(const std::array<int, 3>& o) { return (o[0] + 1) + 3 * (o[1] + 1) + 9 * (o[2] + 1); }

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

inline bool near_box(const Vec3& x, const Box& b, double h, double margin) {
  for (int d = 0; d < b.dim; ++d) {
    const double lo = (b.lo[d] - margin) * h;
    const double hi = (b.lo[d] + b.n[d] + margin) * h;
    if (x[d] < lo || x[d] >= hi) return false;
  }
  return true;
}

inline Vec3 shifted(Vec3 x, const Vec3& s) {
  for (int d = 0; d < 3; ++d) x[d] += s[d];
  return x;
}

inline void put_vec(Writer& w, const Vec3& v) {
  for (double x : v) w.put(x);
}
inline Vec3 get_vec(Reader& r) {
  Vec3 v;
  for (double& x : v) x = r.get<double>();
  return v;
}

/// All offsets in {-1,0,1}^dim except zero.
inline std::vector<std::array<int, 3>> neighbour_offsets(int dim) {
  std::vector<std::array<int, 3>> out;
  const int zr = dim == 3 ? 1 : 0;
  for (int z = -zr; z <= zr; ++z)
    for (int y = -1; y <= 1; ++y)
      for (int x = -1; x <= 1; ++x)
        if (x || y || z) out.push_back({x, y, z});
  return out;
}

}  // namespace detail

/// Sends and receives the ghost-region packets. Replaces store.ghosts and
/// store.ghost_connections.
inline void migrate_ib(Comm& comm, const Partition& part, IBStore& store) {
  const GridSpec& g = part.grid();
  const int me = comm.rank();
  const auto my = part.coords(me);
  const auto offsets = detail::neighbour_offsets(g.dim);

  std::unordered_map<PointId, std::size_t> res_index;
  for (std::size_t i = 0; i < store.residents.size(); ++i) res_index.emplace(store.residents[i].id, i);
  // Connections grouped by centre (store.connections is sorted by centre).
  std::unordered_map<PointId, std::pair<std::size_t, std::size_t>> conn_range;
  for (std::size_t i = 0; i < store.connections.size();) {
    std::size_t j = i;
    while (j < store.connections.size() && store.connections[j].point_id == store.connections[i].point_id) ++j;
    conn_range.emplace(store.connections[i].point_id, std::make_pair(i, j));
    i = j;
  }

  for (const auto& o : offsets) {
    std::array<int, 3> cr{my[0] + o[0], my[1] + o[1], my[2] + o[2]};
    const int dest = part.rank_of(cr);
    const Box box = part.box(dest);
    Wrap wrap{0, 0, 0};
    Vec3 shift{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) {
      wrap[d] = detail::floor_div(cr[d], part.workers()[d]);
      shift[d] = -wrap[d] * g.length[d];
    }
    std::vector<std::size_t> pts;
    std::vector<char> in_packet(store.residents.size(), 0);
    std::vector<std::size_t> conns;
    for (std::size_t i = 0; i < store.residents.size(); ++i) {
      const IBPoint& p = store.residents[i];
      const Vec3 x = detail::shifted(p.X, shift), xh = detail::shifted(p.Xh, shift);
      if (!detail::near_box(x, box, g.h, kPointMargin) && !detail::near_box(xh, box, g.h, kPointMargin)) continue;
      pts.push_back(i);
      in_packet[i] = 1;
      if (!detail::near_box(x, box, g.h, kConnMargin) && !detail::near_box(xh, box, g.h, kConnMargin)) continue;
      auto it = conn_range.find(p.id);
      if (it == conn_range.end()) continue;
      for (std::size_t c = it->second.first; c < it->second.second; ++c) conns.push_back(c);
    }
    for (std::size_t c : conns) {
      for (PointId e : {store.connections[c].l_point_id, store.connections[c].r_point_id}) {
        auto it = res_index.find(e);
        if (it != res_index.end() && !in_packet[it->second]) {
          in_packet[it->second] = 1;
          pts.push_back(it->second);
        }
      }
    }
    std::sort(pts.begin(), pts.end());
    Writer w;
    for (int d = 0; d < 3; ++d) w.put(static_cast<std::int32_t>(wrap[d]));
    w.put(static_cast<std::int64_t>(pts.size()));
    for (std::size_t i : pts) {
      const IBPoint& p = store.residents[i];
      w.put(static_cast<std::int64_t>(p.id));
      detail::put_vec(w, p.X);
      detail::put_vec(w, p.Xh);
      detail::put_vec(w, p.U);
      detail::put_vec(w, p.U_prev);
    }
    w.put(static_cast<std::int64_t>(conns.size()));
    for (std::size_t c : conns) {
      const ForceConnection& fc = store.connections[c];
      w.put(static_cast<std::int64_t>(fc.point_id));
      w.put(static_cast<std::int64_t>(fc.l_point_id));
      w.put(static_cast<std::int64_t>(fc.r_point_id));
      w.put(fc.sigma);
      w.put(fc.rest_L);
      w.put(fc.h_s);
      w.put(fc.weight);
    }
    comm.send(dest, tags::kMigrate + detail::offset_code(o), w.take());
  }

  std::map<std::pair<PointId, Wrap>, GhostPoint> ghosts;
  std::map<PointId, std::vector<ForceConnection>> gconns;
  for (const auto& o : offsets) {
    const int src = part.rank_of({my[0] - o[0], my[1] - o[1], my[2] - o[2]});
    Message m = comm.recv(src, tags::kMigrate + detail::offset_code(o));
    Reader r(m);
    Wrap wrap;
    for (int d = 0; d < 3; ++d) wrap[d] = r.get<std::int32_t>();
    Vec3 shift{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) shift[d] = -wrap[d] * g.length[d];
    const auto np = r.get<std::int64_t>();
    for (std::int64_t i = 0; i < np; ++i) {
      GhostPoint gp;
      gp.wrap = wrap;
      gp.p.id = r.get<std::int64_t>();
      gp.X_sender = detail::get_vec(r);
      gp.p.X = detail::shifted(gp.X_sender, shift);
      gp.p.Xh = detail::shifted(detail::get_vec(r), shift);
      gp.p.U = detail::get_vec(r);
      gp.p.U_prev = detail::get_vec(r);
      if (!ghosts.emplace(std::make_pair(gp.p.id, wrap), gp).second)
        throw ProtocolError("duplicate ghost image of point " + std::to_string(gp.p.id));
    }
    const auto nc = r.get<std::int64_t>();
    std::map<PointId, std::vector<ForceConnection>> packet_conns;
    for (std::int64_t i = 0; i < nc; ++i) {
      ForceConnection fc;
      fc.point_id = r.get<std::int64_t>();
      fc.l_point_id = r.get<std::int64_t>();
      fc.r_point_id = r.get<std::int64_t>();
      fc.sigma = r.get<double>();
      fc.rest_L = r.get<double>();
      fc.h_s = r.get<double>();
      fc.weight = r.get<double>();
      packet_conns[fc.point_id].push_back(fc);
    }
    if (!r.done()) throw ProtocolError("migration packet has trailing bytes");
    for (auto& [id, list] : packet_conns)
      if (!res_index.count(id)) gconns.emplace(id, std::move(list));
  }

  store.ghosts.clear();
  for (auto& [key, gp] : ghosts) store.ghosts.push_back(gp);
  store.ghost_connections.clear();
  for (auto& [id, list] : gconns)
    store.ghost_connections.insert(store.ghost_connections.end(), list.begin(), list.end());
}

/// Evaluates the force density of every local connection from half-step
/// positions and returns the spread sources (one per local image of each
/// centre point).
inline std::vector<SpreadSource> local_force_sources(IBStore& store, const GridSpec& g) {
  std::unordered_map<PointId, std::vector<const Vec3*>> images;
  for (const auto& p : store.residents) images[p.id].push_back(&p.Xh);
  for (const auto& gp : store.ghosts) images[gp.p.id].push_back(&gp.p.Xh);
  auto lookup = [&](PointId id) -> const Vec3* {
    auto it = images.find(id);
    return it == images.end() ? nullptr : it->second.front();
  };
  compute_force_density(store.connections, lookup, g);
  compute_force_density(store.ghost_connections, lookup, g);

  std::vector<SpreadSource> out;
  auto emit = [&](const ForceConnection& c) {
    Vec3 amount{};
    for (int d = 0; d < 3; ++d) amount[d] = c.fdens[d] * c.weight;
    for (const Vec3* x : images.at(c.point_id)) out.push_back({*x, amount});
  };
  for (const auto& c : store.connections) emit(c);
  for (const auto& c : store.ghost_connections) emit(c);
  return out;
}

/// Keeps residents that still belong here, adopts ghosts that moved in, and
/// drops everything else. X of every kept point is wrapped.
inline void cleanup_ib(const Partition& part, int rank, IBStore& store) {
  const GridSpec& g = part.grid();
  std::vector<IBPoint> kept;
  std::vector<ForceConnection> kept_conns;
  std::unordered_map<PointId, char> kept_ids;
  for (IBPoint p : store.residents) {
    p.X = wrap_position(p.X, g);
    if (part.owner_of(p.X) == rank) {
      kept_ids.emplace(p.id, 1);
      kept.push_back(p);
    }
  }
  std::unordered_map<PointId, char> adopted;
  for (const auto& gp : store.ghosts) {
    IBPoint p = gp.p;
    p.X = wrap_position(gp.X_sender, g);
    if (part.owner_of(p.X) != rank || kept_ids.count(p.id)) continue;
    kept_ids.emplace(p.id, 1);
    adopted.emplace(p.id, 1);
    kept.push_back(p);
  }
  for (const auto& c : store.connections)
    if (kept_ids.count(c.point_id)) kept_conns.push_back(c);
  for (const auto& c : store.ghost_connections)
    if (adopted.count(c.point_id)) kept_conns.push_back(c);
  store.residents = std::move(kept);
  store.connections = std::move(kept_conns);
  store.ghosts.clear();
  store.ghost_connections.clear();
  store.sort_residents();
  store.sort_connections();
}

/// Global totals of resident points and connections.
struct EntityCounts {
  long points = 0;
  long connections = 0;
  bool operator==(const EntityCounts&) const = default;
};

inline EntityCounts count_entities(Comm& comm, const IBStore& store) {
  return {comm.allreduce_sum(static_cast<long>(store.residents.size())),
          comm.allreduce_sum(static_cast<long>(store.connections.size()))};
}

}  // namespace ibgm
