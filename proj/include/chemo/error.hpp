#pragma once

#include <stdexcept>
#include <string>

namespace chemo {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the evaluation domain of a closed form
// (e.g. the singular point a + s = 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A parameter set or configuration violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An iterative procedure hit its cap: quadrature depth, CG iterations,
// parameter grids, ladder length.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The adaptive time step fell below dt_min.
class StepUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace chemo
