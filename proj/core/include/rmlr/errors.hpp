#pragma once

#include <stdexcept>
#include <string>

namespace rmlr {

// Precondition violations use std::invalid_argument. The two classes below
// carry the failure categories the command-line harness maps to exit codes.

/// Raised when a linear-algebra step cannot proceed (singular normal
/// equations, an all-zero accumulator, an empty cluster that must not be).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration entries. The message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmlr
