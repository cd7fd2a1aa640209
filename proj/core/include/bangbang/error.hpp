#pragma once

#include <stdexcept>
#include <string>

namespace bangbang {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (unknown keys, out-of-range values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A value became NaN/inf, or an input was non-finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Tensor or vector dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace bangbang
