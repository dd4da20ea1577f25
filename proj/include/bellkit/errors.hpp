#pragma once

#include <stdexcept>
#include <string>

namespace bellkit {

/// Malformed input: wrong dimensions, out-of-range parameters, missing entries.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A size or memory guard was exceeded.
struct GuardError : std::length_error {
  using std::length_error::length_error;
};

}  // namespace bellkit
