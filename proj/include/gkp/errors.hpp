#pragma once

#include <stdexcept>
#include <string>

namespace gkp {

// Input violates a documented precondition (bad code vectors, CP violation, ...).
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Request is well-formed but outside the regime a computation supports.
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// A configurable work cap was exceeded (e.g. lattice enumeration box).
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed textual input (circuit files, gate expressions, code strings).
struct parse_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace gkp
