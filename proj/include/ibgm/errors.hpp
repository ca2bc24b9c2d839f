#pragma once

#include <stdexcept>
#include <string>

namespace ibgm {

/// Invalid or inconsistent user configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Zero pivots, singular strains, non-finite state (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Violation of the inter-worker data contract, e.g. an IB stencil reaching
/// outside the halo or a force connection whose endpoints never arrived.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised in every worker once any worker has failed.
struct WorkerAborted : std::runtime_error {
  WorkerAborted() : std::runtime_error("worker group aborted") {}
};

}  // namespace ibgm
