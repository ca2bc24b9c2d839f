#pragma once

/// @file problems.hpp
/// @brief Run configuration (flat key = value text) and the canonical test
/// problems: thin ellipse, thick elliptical shell, tiled ellipse array, 3D
/// cylindrical shell and Taylor-Green vortex.
///
/// Config format: one `key = value` per line, `#` starts a comment. Keys:
///   problem       thin_ellipse | thick_shell | multi_ellipse | cylinder_3d | taylor_green
///   N             cells per unit length
///   dt            time step (problem default when omitted)
///   t_end         end time; steps = round(t_end / dt) unless `steps` is set
///   steps         explicit step count
///   rho, mu, chi  fluid parameters
///   sigma         fiber stiffness (thin ellipse, ellipse array, thick shell peak scale)
///   sigma_s, sigma_r, rest_L   cylinder fiber families
///   r1, r2, gamma ellipse semi-axes and shell thickness
///   Ns, Nr        Lagrangian counts (derived from N when omitted)
///   px, py, pz    worker grid
///   ellipses_x, ellipses_y     ellipse array size (defaults to px, py)
///   solver        gm | bcm
///   rotate        1 | 0, alternate the sweep order by step parity
///   output_every  diagnostics cadence in steps (0 = final only)
///   dump_fields   1 | 0, also dump fields every output_every steps

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ibgm/errors.hpp"
#include "ibgm/grid.hpp"
#include "ibgm/ib_structure.hpp"

namespace ibgm {

enum class ProblemKind { ThinEllipse, ThickShell, MultiEllipse, Cylinder3D, TaylorGreen };
enum class SolverKind { GM, BCM };

inline ProblemKind parse_problem(const std::string& s) {
  if (s == "thin_ellipse") return ProblemKind::ThinEllipse;
  if (s == "thick_shell") return ProblemKind::ThickShell;
  if (s == "multi_ellipse") return ProblemKind::MultiEllipse;
  if (s == "cylinder_3d") return ProblemKind::Cylinder3D;
  if (s == "taylor_green") return ProblemKind::TaylorGreen;
  throw ConfigError("unknown problem '" + s + "'");
}

inline const char* problem_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::ThinEllipse: return "thin_ellipse";
    case ProblemKind::ThickShell: return "thick_shell";
    case ProblemKind::MultiEllipse: return "multi_ellipse";
    case ProblemKind::Cylinder3D: return "cylinder_3d";
    case ProblemKind::TaylorGreen: return "taylor_green";
  }
  return "?";
}

struct ProblemConfig {
  ProblemKind problem = ProblemKind::ThinEllipse;
  int N = 64;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<long> steps;
  double rho = 1.0;
  double mu = 0.01;
  double chi = 0.6;
  double sigma = 1.0;
  double sigma_s = 1.0;
  double sigma_r = 1.0;
  double rest_L = 1.0;
  std::optional<double> r1, r2;
  double gamma = 0.0625;
  std::optional<int> Ns, Nr;
  std::array<int, 3> workers{1, 1, 1};
  std::optional<int> ellipses_x, ellipses_y;
  SolverKind solver = SolverKind::GM;
  bool rotate = true;
  long output_every = 0;
  bool dump_fields = false;

  int dim() const { return problem == ProblemKind::Cylinder3D ? 3 : 2; }
  double h() const { return 1.0 / N; }

  double resolved_r1() const {
    if (r1) return *r1;
    return problem == ProblemKind::ThickShell ? 0.2 : 5.0 / 28.0;
  }
  double resolved_r2() const {
    if (r2) return *r2;
    return problem == ProblemKind::ThickShell ? 0.25 : 7.0 / 20.0;
  }
  int resolved_Ns() const {
    if (Ns) return *Ns;
    if (problem == ProblemKind::ThickShell) return 75 * N / 16;
    return 19 * N / 4;
  }
  int resolved_Nr() const {
    if (Nr) return *Nr;
    if (problem == ProblemKind::ThickShell) return 3 * N / 8;
    if (problem == ProblemKind::Cylinder3D) return 3 * N;
    return 1;
  }
  double resolved_dt() const {
    if (dt) return *dt;
    switch (problem) {
      case ProblemKind::ThinEllipse: return 0.04 / 512;
      case ProblemKind::ThickShell: return 0.08 / 512;
      case ProblemKind::MultiEllipse: return 0.01 * h();
      case ProblemKind::Cylinder3D: return 0.04 / N;
      case ProblemKind::TaylorGreen: return 0.25 * h();
    }
    return 0.0;
  }
  long resolved_steps() const {
    if (steps) return *steps;
    if (t_end) return std::lround(*t_end / resolved_dt());
    return 0;
  }
  int resolved_ellipses(int axis) const {
    const auto& e = axis == 0 ? ellipses_x : ellipses_y;
    return e ? *e : workers[axis];
  }

  void validate() const {
    if (N < 4) throw ConfigError("N must be at least 4");
    if (!(resolved_dt() > 0.0)) throw ConfigError("dt must be positive");
    if (resolved_steps() < 0) throw ConfigError("step count must be non-negative");
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    if (!(mu >= 0.0)) throw ConfigError("mu must be non-negative");
    if (!(chi > 0.0 && chi <= 1.0)) throw ConfigError("chi must lie in (0, 1]");
    for (int d = 0; d < 3; ++d)
      if (workers[d] < 1) throw ConfigError("worker grid entries must be positive");
    if (dim() == 2 && workers[2] != 1) throw ConfigError("pz must be 1 for 2D problems");
    if (problem != ProblemKind::TaylorGreen && !Ns) {
      const bool thick = problem == ProblemKind::ThickShell;
      if ((thick ? 75 * N % 16 : 19 * N % 4) != 0)
        throw ConfigError("derived Ns is not an integer for this N; set Ns explicitly");
    }
    if (problem == ProblemKind::ThickShell && !Nr && 3 * N % 8 != 0)
      throw ConfigError("derived Nr is not an integer for this N; set Nr explicitly");
    if (problem != ProblemKind::TaylorGreen && resolved_Ns() < 3) throw ConfigError("Ns must be at least 3");
    if ((problem == ProblemKind::ThickShell || problem == ProblemKind::Cylinder3D) && resolved_Nr() < 1)
      throw ConfigError("Nr must be positive");
    if (problem == ProblemKind::MultiEllipse && (resolved_ellipses(0) < 1 || resolved_ellipses(1) < 1))
      throw ConfigError("ellipse array dimensions must be positive");
    if (solver == SolverKind::BCM && workers[0] * workers[1] * workers[2] != 1)
      throw ConfigError("the projection solver runs on a single worker");
  }
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}
inline long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}
inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}
}  // namespace detail

/// Applies one key to a config. Unknown keys are errors.
inline void set_config_value(ProblemConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string& v = value;
  if (key == "problem") c.problem = parse_problem(v);
  else if (key == "N") c.N = static_cast<int>(to_long(key, v));
  else if (key == "dt") c.dt = to_double(key, v);
  else if (key == "t_end") c.t_end = to_double(key, v);
  else if (key == "steps") c.steps = to_long(key, v);
  else if (key == "rho") c.rho = to_double(key, v);
  else if (key == "mu") c.mu = to_double(key, v);
  else if (key == "chi") c.chi = to_double(key, v);
  else if (key == "sigma") c.sigma = to_double(key, v);
  else if (key == "sigma_s") c.sigma_s = to_double(key, v);
  else if (key == "sigma_r") c.sigma_r = to_double(key, v);
  else if (key == "rest_L") c.rest_L = to_double(key, v);
  else if (key == "r1") c.r1 = to_double(key, v);
  else if (key == "r2") c.r2 = to_double(key, v);
  else if (key == "gamma") c.gamma = to_double(key, v);
  else if (key == "Ns") c.Ns = static_cast<int>(to_long(key, v));
  else if (key == "Nr") c.Nr = static_cast<int>(to_long(key, v));
  else if (key == "px") c.workers[0] = static_cast<int>(to_long(key, v));
  else if (key == "py") c.workers[1] = static_cast<int>(to_long(key, v));
  else if (key == "pz") c.workers[2] = static_cast<int>(to_long(key, v));
  else if (key == "ellipses_x") c.ellipses_x = static_cast<int>(to_long(key, v));
  else if (key == "ellipses_y") c.ellipses_y = static_cast<int>(to_long(key, v));
  else if (key == "solver") {
    if (v == "gm") c.solver = SolverKind::GM;
    else if (v == "bcm") c.solver = SolverKind::BCM;
    else throw ConfigError("solver must be gm or bcm");
  } else if (key == "rotate") c.rotate = to_bool(key, v);
  else if (key == "output_every") c.output_every = to_long(key, v);
  else if (key == "dump_fields") c.dump_fields = to_bool(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

inline ProblemConfig parse_config(std::istream& in) {
  ProblemConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

inline ProblemConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// A closed fiber, as ordered point ids, for area and radius diagnostics.
struct Fiber {
  std::vector<PointId> ids;
  std::array<int, 2> plane{0, 1};  // coordinate axes of the cross-section
};

struct Problem {
  ProblemConfig cfg;
  GridSpec grid;
  /// Initial velocity component `d` at a physical position.
  std::function<double(int d, const Vec3& x)> u0;
  std::vector<IBPoint> points;  // index == id
  std::vector<ForceConnection> connections;
  std::vector<Fiber> fibers;  // closed fibers used by the diagnostics
  Vec3 center{0.5, 0.5, 0.5};
  /// Lagrangian quadrature weight per point (h_s, or h_s h_r).
  double lagrangian_weight = 1.0;
};

namespace detail {

inline void add_ring(Problem& pb, const Vec3& c, double a, double b, int ns, double sigma, double weight,
                     bool keep_fiber) {
  const PointId base = static_cast<PointId>(pb.points.size());
  const double hs = 1.0 / ns;
  Fiber f;
  for (int k = 0; k < ns; ++k) {
    const double s = 2.0 * std::numbers::pi * k / ns;
    IBPoint p;
    p.id = base + k;
    p.X = {c[0] + a * std::cos(s), c[1] + b * std::sin(s), 0.0};
    pb.points.push_back(p);
    f.ids.push_back(p.id);
  }
  for (int k = 0; k < ns; ++k) {
    ForceConnection fc;
    fc.point_id = base + k;
    fc.l_point_id = base + (k + ns - 1) % ns;
    fc.r_point_id = base + (k + 1) % ns;
    fc.sigma = sigma;
    fc.rest_L = 0.0;
    fc.h_s = hs;
    fc.weight = weight;
    pb.connections.push_back(fc);
  }
  if (keep_fiber) pb.fibers.push_back(std::move(f));
}

}  // namespace detail

inline Problem build_problem(const ProblemConfig& cfg) {
  cfg.validate();
  Problem pb;
  pb.cfg = cfg;
  const int N = cfg.N;
  const double r1 = cfg.resolved_r1(), r2 = cfg.resolved_r2();
  pb.u0 = [](int, const Vec3&) { return 0.0; };
  switch (cfg.problem) {
    case ProblemKind::ThinEllipse: {
      pb.grid = GridSpec::square(2, N, 1.0);
      const int ns = cfg.resolved_Ns();
      pb.lagrangian_weight = 1.0 / ns;
      detail::add_ring(pb, {0.5, 0.5, 0.0}, r1, r2, ns, cfg.sigma, 1.0 / ns, true);
      break;
    }
    case ProblemKind::ThickShell: {
      pb.grid = GridSpec::square(2, N, 1.0);
      const int ns = cfg.resolved_Ns(), nr = cfg.resolved_Nr();
      const double hr = 1.0 / nr;
      pb.lagrangian_weight = hr / ns;
      for (int j = 0; j < nr; ++j) {
        const double r = (j + 0.5) * hr;
        const double off = cfg.gamma * (r - 0.5);
        const double sig = cfg.sigma * (1.0 - std::cos(2.0 * std::numbers::pi * r));
        detail::add_ring(pb, {0.5, 0.5, 0.0}, r1 + off, r2 + off, ns, sig, hr / ns, true);
      }
      break;
    }
    case ProblemKind::MultiEllipse: {
      const int ex = cfg.resolved_ellipses(0), ey = cfg.resolved_ellipses(1);
      pb.grid = GridSpec::tiled(2, {ex * N, ey * N, 1}, 1.0 / N);
      const int ns = cfg.resolved_Ns();
      pb.lagrangian_weight = 1.0 / ns;
      for (int m = 0; m < ey; ++m)
        for (int l = 0; l < ex; ++l)
          detail::add_ring(pb, {l + 0.5, m + 0.5, 0.0}, r1, r2, ns, cfg.sigma, 1.0 / ns, true);
      pb.center = {0.5 * ex, 0.5 * ey, 0.0};
      const double ub = 0.5, vb = 0.5 * std::sqrt(3.0);
      pb.u0 = [ub, vb](int d, const Vec3&) { return d == 0 ? ub : d == 1 ? vb : 0.0; };
      break;
    }
    case ProblemKind::Cylinder3D: {
      pb.grid = GridSpec::square(3, N, 1.0);
      const int ns = cfg.resolved_Ns(), nr = cfg.resolved_Nr();
      const double hs = 1.0 / ns, hr = 1.0 / nr;
      const double w = hs * hr;
      pb.lagrangian_weight = w;
      auto id = [ns](int k, int j) { return static_cast<PointId>(j) * ns + k; };
      for (int j = 0; j < nr; ++j)
        for (int k = 0; k < ns; ++k) {
          const double s = 2.0 * std::numbers::pi * k / ns;
          IBPoint p;
          p.id = id(k, j);
          p.X = {j * hr, 0.5 + r1 * std::cos(s), 0.5 + r2 * std::sin(s)};
          pb.points.push_back(p);
        }
      for (int j = 0; j < nr; ++j)
        for (int k = 0; k < ns; ++k) {
          ForceConnection cs;
          cs.point_id = id(k, j);
          cs.l_point_id = id((k + ns - 1) % ns, j);
          cs.r_point_id = id((k + 1) % ns, j);
          cs.sigma = cfg.sigma_s;
          cs.rest_L = 0.0;
          cs.h_s = hs;
          cs.weight = w;
          pb.connections.push_back(cs);
          ForceConnection cr;
          cr.point_id = id(k, j);
          cr.l_point_id = id(k, (j + nr - 1) % nr);
          cr.r_point_id = id(k, (j + 1) % nr);
          cr.sigma = cfg.sigma_r;
          cr.rest_L = cfg.rest_L;
          cr.h_s = hr;
          cr.weight = w;
          pb.connections.push_back(cr);
        }
      // Cross-section at r = 0 for area diagnostics (projected on y-z).
      Fiber f;
      f.plane = {1, 2};
      for (int k = 0; k < ns; ++k) f.ids.push_back(id(k, 0));
      pb.fibers.push_back(std::move(f));
      pb.center = {0.5, 0.5, 0.5};
      break;
    }
    case ProblemKind::TaylorGreen: {
      pb.grid = GridSpec::square(2, N, 1.0);
      pb.u0 = [](int d, const Vec3& x) {
        const double a = 2.0 * std::numbers::pi;
        if (d == 0) return std::sin(a * x[0]) * std::cos(a * x[1]);
        if (d == 1) return -std::cos(a * x[0]) * std::sin(a * x[1]);
        return 0.0;
      };
      break;
    }
  }
  return pb;
}

/// Analytic Taylor-Green velocity at time t for kinematic viscosity nu.
inline double taylor_green_velocity(int d, const Vec3& x, double t, double nu) {
  const double a = 2.0 * std::numbers::pi;
  const double decay = std::exp(-2.0 * a * a * nu * t);
  if (d == 0) return std::sin(a * x[0]) * std::cos(a * x[1]) * decay;
  if (d == 1) return -std::cos(a * x[0]) * std::sin(a * x[1]) * decay;
  return 0.0;
}

}  // namespace ibgm
