#pragma once

#include <stdexcept>
#include <string>

namespace nonpure {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A density's support reaches the two-layer margin of its box.
class SupportOverflow : public Error {
 public:
  using Error::Error;
};

/// Grids, parameter boxes or matrix sizes do not agree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A value violates a type invariant (negative density, bad trace, ...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Form degree or argument count out of range.
class DegreeError : public Error {
 public:
  using Error::Error;
};

/// Explicit time step exceeds the advective stability bound.
class CflViolation : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

/// Transport problem too large for the exact solver.
class SizeOverflow : public Error {
 public:
  using Error::Error;
};

class NormOverflow : public Error {
 public:
  using Error::Error;
};

/// Index lies on the boundary where a centered estimate is undefined.
class BoundaryIndex : public Error {
 public:
  using Error::Error;
};

/// A theorem's hypothesis is not met by the supplied fixture; carries the
/// residual that failed the check.
class PreconditionViolated : public Error {
 public:
  PreconditionViolated(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace nonpure
