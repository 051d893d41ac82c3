#pragma once

#include <stdexcept>
#include <string>

namespace fundsim {

// Bad inputs: scenario fields, preconditions, malformed requests. CLI exit 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Filesystem and serialization failures. CLI exit 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operating on a path that blew through its positivity floor.
struct InvalidPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fundsim
