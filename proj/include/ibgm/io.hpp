#pragma once

/// @file io.hpp
/// @brief Field dumps, fiber layout files and CSV writers.
///
/// Field dump: `<stem>.bin` holds the interior values of one component as
/// little-endian float64, x fastest; `<stem>.hdr` is a key=value sidecar:
///   component=u0|u1|u2|p
///   location=edge_x|edge_y|edge_z|center
///   N=<nx> <ny> [<nz>]
///   H=<hx> <hy> [<hz>]
///   time=<t>
///   step=<n>
///
/// Fiber layout (text, '#' comments):
///   point <id> <x> <y> [<z>]
///   conn <point> <left> <right> <sigma> <rest_L> <h_s> <weight>
///
/// Diagnostics CSV columns:
///   step,time,max_radius,mean_radius,area,div_l2,kinetic_energy
/// Timing CSV columns:
///   phase,seconds

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ibgm/diagnostics.hpp"
#include "ibgm/errors.hpp"
#include "ibgm/problems.hpp"
#include "ibgm/simulation.hpp"
#include "ibgm/timing.hpp"

namespace ibgm {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, mode);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

inline void write_le_doubles(std::ostream& out, std::span<const double> v) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  } else {
    for (double d : v) {
      auto b = std::bit_cast<std::array<char, 8>>(d);
      std::reverse(b.begin(), b.end());
      out.write(b.data(), 8);
    }
  }
}

}  // namespace detail

/// Writes `<stem>.bin` and `<stem>.hdr` for one dense component.
inline void write_field(const std::filesystem::path& stem, const std::string& component, Stagger loc,
                        const GridSpec& g, std::span<const double> values, double time, long step) {
  if (values.size() != g.total_cells()) throw std::invalid_argument("write_field: size does not match grid");
  auto bin = detail::open_out(stem.string() + ".bin", std::ios::out | std::ios::binary);
  detail::write_le_doubles(bin, values);
  auto hdr = detail::open_out(stem.string() + ".hdr");
  hdr << "component=" << component << "\nlocation=" << stagger_name(loc) << "\nN=";
  for (int d = 0; d < g.dim; ++d) hdr << (d ? " " : "") << g.cells[d];
  hdr << "\nH=";
  for (int d = 0; d < g.dim; ++d) hdr << (d ? " " : "") << detail::fmt_double(g.cells[d] * g.h);
  hdr << "\ntime=" << detail::fmt_double(time) << "\nstep=" << step << "\n";
}

struct FieldHeader {
  std::string component;
  std::string location;
  std::vector<int> N;
  std::vector<double> H;
  double time = 0.0;
  long step = 0;
};

inline FieldHeader read_field_header(const std::filesystem::path& hdr_path) {
  std::ifstream in(hdr_path);
  if (!in) throw std::runtime_error("cannot open " + hdr_path.string());
  FieldHeader h;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = line.substr(0, eq);
    std::istringstream v(line.substr(eq + 1));
    if (k == "component") v >> h.component;
    else if (k == "location") v >> h.location;
    else if (k == "N") for (int x; v >> x;) h.N.push_back(x);
    else if (k == "H") for (double x; v >> x;) h.H.push_back(x);
    else if (k == "time") v >> h.time;
    else if (k == "step") v >> h.step;
  }
  return h;
}

inline std::vector<double> read_field_values(const std::filesystem::path& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + bin_path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() % 8 != 0) throw std::runtime_error("truncated field file " + bin_path.string());
  std::vector<double> out(raw.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::array<char, 8> b;
    std::copy_n(raw.begin() + 8 * i, 8, b.begin());
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    out[i] = std::bit_cast<double>(b);
  }
  return out;
}

/// Dumps every velocity component and the pressure under `dir`.
inline void write_fields(const std::filesystem::path& dir, const std::string& tag, const GlobalFields& gf) {
  for (int d = 0; d < gf.grid.dim; ++d)
    write_field(dir / ("u" + std::to_string(d) + "_" + tag), "u" + std::to_string(d), edge_stagger(d), gf.grid,
                gf.u[d], gf.time, gf.step);
  write_field(dir / ("p_" + tag), "p", Stagger::Center, gf.grid, gf.p, gf.time, gf.step);
}

inline void write_fiber_layout(const std::filesystem::path& path, int dim, std::span<const IBPoint> points,
                               std::span<const ForceConnection> conns) {
  auto out = detail::open_out(path);
  out << "# point id x y" << (dim == 3 ? " z" : "") << "\n# conn point left right sigma rest_L h_s weight\n";
  for (const auto& p : points) {
    out << "point " << p.id;
    for (int a = 0; a < dim; ++a) out << ' ' << detail::fmt_double(p.X[a]);
    out << '\n';
  }
  for (const auto& c : conns)
    out << "conn " << c.point_id << ' ' << c.l_point_id << ' ' << c.r_point_id << ' ' << detail::fmt_double(c.sigma)
        << ' ' << detail::fmt_double(c.rest_L) << ' ' << detail::fmt_double(c.h_s) << ' '
        << detail::fmt_double(c.weight) << '\n';
}

/// Positions from `X` (by id) with the problem's connections.
inline void write_fiber_snapshot(const std::filesystem::path& path, const Problem& pb, const GlobalFields& gf) {
  std::vector<IBPoint> pts = pb.points;
  for (std::size_t i = 0; i < pts.size() && i < gf.X.size(); ++i) pts[i].X = gf.X[i];
  write_fiber_layout(path, pb.grid.dim, pts, pb.connections);
}

struct FiberLayout {
  std::vector<IBPoint> points;
  std::vector<ForceConnection> connections;
};

inline FiberLayout read_fiber_layout(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  FiberLayout f;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    std::string kind;
    s >> kind;
    if (kind == "point") {
      IBPoint p;
      s >> p.id;
      for (int a = 0; a < dim; ++a) s >> p.X[a];
      p.Xh = p.X;
      f.points.push_back(p);
    } else if (kind == "conn") {
      ForceConnection c;
      s >> c.point_id >> c.l_point_id >> c.r_point_id >> c.sigma >> c.rest_L >> c.h_s >> c.weight;
      f.connections.push_back(c);
    }
    if (!s) throw std::runtime_error("malformed fiber record: " + line);
  }
  return f;
}

inline constexpr const char* kDiagnosticsHeader = "step,time,max_radius,mean_radius,area,div_l2,kinetic_energy";

inline void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> recs) {
  auto out = detail::open_out(path);
  out << kDiagnosticsHeader << '\n';
  for (const auto& r : recs)
    out << r.step << ',' << detail::fmt_double(r.time) << ',' << detail::fmt_double(r.max_radius) << ','
        << detail::fmt_double(r.mean_radius) << ',' << detail::fmt_double(r.area) << ','
        << detail::fmt_double(r.div_norm) << ',' << detail::fmt_double(r.kinetic_energy) << '\n';
}

inline void write_timing_csv(const std::filesystem::path& path, const PhaseTimes& t, long steps) {
  auto out = detail::open_out(path);
  out << "phase,seconds\n";
  for (std::size_t i = 0; i < kPhaseCount; ++i)
    out << phase_name(static_cast<Phase>(i)) << ',' << detail::fmt_double(t.seconds[i]) << '\n';
  out << "total," << detail::fmt_double(t.total()) << '\n';
  out << "per_step," << detail::fmt_double(steps > 0 ? t.total() / steps : 0.0) << '\n';
}

}  // namespace ibgm
