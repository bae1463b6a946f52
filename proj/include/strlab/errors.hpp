#pragma once

#include <stdexcept>
#include <string>

namespace strlab {

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent configuration (unknown keys, bad values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read/written or has a bad format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch or non-finite value produced by a numeric kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// CTC target cannot be aligned within the given number of frames.
/// Distinct type so callers can tell infeasibility from numeric trouble.
class InfeasibleTargetError : public Error {
 public:
  using Error::Error;
};

}  // namespace strlab
