#pragma once

#include <stdexcept>
#include <string>

namespace uniseq {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad flags, malformed files, out-of-range values,
/// incompatible configurations. The CLI maps these to exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

/// Failures while executing an otherwise valid request (I/O faults,
/// numeric faults, broken internal contracts). CLI exit code 2.
struct RuntimeFault : Error {
  using Error::Error;
};

struct ShapeError : ValidationError {
  using ValidationError::ValidationError;
};
struct RangeError : ValidationError {
  using ValidationError::ValidationError;
};
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};
struct DataError : ValidationError {
  using ValidationError::ValidationError;
};
struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};
struct CompatibilityError : ValidationError {
  using ValidationError::ValidationError;
};
struct TemplateError : ValidationError {
  using ValidationError::ValidationError;
};
struct UsageError : ValidationError {
  using ValidationError::ValidationError;
};

struct IoError : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};
/// NaN or Inf surfaced inside a numeric kernel; the offending operation
/// is aborted rather than letting the value propagate.
struct NumericFault : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};
struct ContractError : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};

}  // namespace uniseq
