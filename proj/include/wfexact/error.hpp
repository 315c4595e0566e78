#pragma once

#include <stdexcept>
#include <string>

namespace wfexact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The exact series machinery could not decide within its iteration budget
/// (typically t is too small for double-precision cancellation to be benign).
class ExactModeFailure : public Error {
 public:
  using Error::Error;
};

/// The alternating-series inversion could not separate u from a partial-sum
/// boundary. Recoverable by drawing a fresh uniform.
class RefinementCapExceeded : public ExactModeFailure {
 public:
  using ExactModeFailure::ExactModeFailure;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}
}  // namespace detail

}  // namespace wfexact
