#pragma once

#include <stdexcept>
#include <string>

namespace lvn {

// The CLI maps these three families onto exit codes 1, 2 and 3.

/// Invalid configuration, arguments or preconditions supplied by a caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, edge lists, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-convergence, non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimension mismatch. Always a programming or configuration bug.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace lvn
