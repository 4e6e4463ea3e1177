#pragma once

#include <stdexcept>
#include <string>

namespace tcs {

/// Base class for every error raised by the sampling toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A query or operation fell outside the valid range of a path or table.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// The true event rate exceeded the declared dominating envelope.
class EnvelopeViolation : public Error {
 public:
  using Error::Error;
};

/// A rate, drift or speed evaluated to NaN or infinity.
class NonFiniteRate : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class ReflectAtCriticalPoint : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an analytic formula does not hold.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

}  // namespace tcs
