#pragma once

#include <stdexcept>
#include <string>

namespace stiefel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (shape, range, symmetry).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A factorization met a (numerically) singular matrix.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// An iterative factorization did not converge within its sweep cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the domain of a map (zero reflector, zero angle pair).
/// During sampling these are reported as divergent transitions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series handed to a diagnostic has no variation.
class DegenerateSeriesError : public Error {
 public:
  using Error::Error;
};

class SamplerError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stiefel
