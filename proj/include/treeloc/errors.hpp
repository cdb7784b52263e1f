#pragma once

#include <stdexcept>
#include <string>

namespace treeloc {

// Iterative solver failed to reach its tolerance; message carries the last
// iterate and residual for diagnosis.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A root/threshold search could not locate or certify its target (bracketing
// failure, winding-number mismatch, scan exhausted).
struct SearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input asks for more than the implementation supports (depth caps etc.).
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An honest "the scan found no certificate" outcome, distinct from bugs.
struct CertificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two independent computations of the same quantity disagree beyond
// tolerance; indicates discretization too coarse or a defect.
struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace treeloc
