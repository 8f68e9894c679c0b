#pragma once

#include <stdexcept>
#include <string>

namespace onnsim {

// A cell missed its program-verify target within the pulse budget.
struct ProgrammingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure inside the transient engine (branch fixed point did not
// converge, or the integration produced non-finite state).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace onnsim
