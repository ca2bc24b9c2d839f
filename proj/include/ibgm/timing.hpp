#pragma once

/// @file timing.hpp
/// @brief Wall-clock accumulation per timestep phase.

#include <array>
#include <chrono>
#include <cstddef>

namespace ibgm {

enum class Phase : std::size_t {
  Interpolate,
  Evolve,
  Migrate,
  Spread,
  Cleanup,
  Explicit,
  Sweeps,
  PsiSolve,
  Pressure,
  Count
};

inline constexpr std::size_t kPhaseCount = static_cast<std::size_t>(Phase::Count);

inline const char* phase_name(Phase p) {
  static constexpr std::array<const char*, kPhaseCount> names{
      "interpolate", "evolve", "migrate", "spread", "cleanup", "explicit", "sweeps", "psi_solve", "pressure"};
  return names[static_cast<std::size_t>(p)];
}

struct PhaseTimes {
  std::array<double, kPhaseCount> seconds{};

  double& operator[](Phase p) { return seconds[static_cast<std::size_t>(p)]; }
  double operator[](Phase p) const { return seconds[static_cast<std::size_t>(p)]; }
  double total() const {
    double t = 0.0;
    for (double s : seconds) t += s;
    return t;
  }
};

/// Adds the elapsed time of its scope to one phase. A null target disables it.
class ScopedPhase {
 public:
  ScopedPhase(PhaseTimes* t, Phase p) : t_(t), p_(p), start_(std::chrono::steady_clock::now()) {}
  ~ScopedPhase() {
    if (t_) (*t_)[p_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  ScopedPhase(const ScopedPhase&) = delete;
  ScopedPhase& operator=(const ScopedPhase&) = delete;

 private:
  PhaseTimes* t_;
  Phase p_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ibgm
