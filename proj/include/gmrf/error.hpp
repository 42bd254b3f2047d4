#pragma once

#include <stdexcept>
#include <string>

namespace gmrf {

// Exception hierarchy. The CLI maps each family onto an exit code:
// FormatError -> 2, PreconditionError -> 3, IoError -> 4.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON schema, binary header, CLI argument).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numeric precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// I - C(theta) is not positive definite.
class NotPositiveDefinite : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A dense p^2 x p^2 oracle was requested above the configured side limit.
class DenseLimitExceeded : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmrf
