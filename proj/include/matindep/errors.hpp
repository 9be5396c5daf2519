#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace matindep {

// Invalid argument to a generator, estimator or test (bad rho, alpha, dims).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be processed: NaN/Inf, zero-variance rows, CSV
// syntax problems.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A variable (row of the data matrix) has zero sample variance.
class DegenerateVariableError : public DataError {
 public:
  DegenerateVariableError(std::size_t row, const std::string& what)
      : DataError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A sample (column of the data matrix) has zero row-covariance diagonal.
class DegenerateSampleError : public DataError {
 public:
  DegenerateSampleError(std::size_t column, const std::string& what)
      : DataError(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Numerical failure: non-PSD matrices, infeasible or non-converging programs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPsdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Raised when the sandwich covariance has a nonpositive diagonal entry.
class DegenerateSandwichError : public NumericalError {
 public:
  DegenerateSandwichError(std::size_t index, const std::string& what)
      : NumericalError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class InfeasibleError : public NumericalError {
 public:
  InfeasibleError(std::size_t column, double min_lambda, const std::string& what)
      : NumericalError(what), column_(column), min_lambda_(min_lambda) {}
  std::size_t column() const noexcept { return column_; }
  // Smallest regularization level at which the column program is feasible.
  double min_lambda() const noexcept { return min_lambda_; }

 private:
  std::size_t column_;
  double min_lambda_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(std::size_t column, const std::string& what)
      : NumericalError(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class TuningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace matindep
