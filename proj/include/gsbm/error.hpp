#pragma once

#include <stdexcept>
#include <string>

namespace gsbm {

/// Base class for every error raised by the library. The CLI maps the
/// three subclasses onto exit codes 1, 2 and 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or input violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge or a numerical precondition
/// (e.g. distance from the spectrum) does not hold.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double last_residual = 0.0)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsbm
