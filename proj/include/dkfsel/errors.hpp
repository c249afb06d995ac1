#pragma once

#include <stdexcept>
#include <string>

namespace dkfsel {

/// Base class for every error raised by the library. `exit_code()` is the
/// process exit status the CLI maps the error onto.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Invalid configuration, parameters or preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A table-driven transition was asked for a step it does not cover.
class HorizonError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SelectionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Precondition `i1 <= i2` of the monotonicity check does not hold.
class OrderingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Non-finite intermediate, divergence or an ill-posed numerical problem.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, long step)
      : NumericError(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Observer gain requested while the information matrix is still singular.
class NotObservableError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Metric whose normaliser is zero (e.g. MD on an all-zero trajectory).
class UndefinedMetricError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace dkfsel
