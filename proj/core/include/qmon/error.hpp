#pragma once

#include <stdexcept>
#include <string>

namespace qmon {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected configuration or physically invalid parameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a trajectory produces a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmon
