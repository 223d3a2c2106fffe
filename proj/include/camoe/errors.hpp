#pragma once

#include <stdexcept>
#include <string>

namespace camoe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or precondition supplied by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed, non-finite or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant did not hold.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// No neighbor of the current node has a finite score.
class NoCandidateError : public Error {
 public:
  using Error::Error;
};

}  // namespace camoe
