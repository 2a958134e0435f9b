#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aslpv {

/// Precondition or structural violation on the inputs of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or document (CLI exit code 2).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fixed-point iteration hit its iteration cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual,
                   std::vector<double> residual_tail = {})
      : std::runtime_error(what),
        residual_(residual),
        residual_tail_(std::move(residual_tail)) {}

  double residual() const { return residual_; }
  const std::vector<double>& residual_tail() const { return residual_tail_; }

 private:
  double residual_;
  std::vector<double> residual_tail_;
};

/// The innovation covariance of a regime stopped being positive definite.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(const std::string& what, int letter, int iteration)
      : std::runtime_error(what), letter_(letter), iteration_(iteration) {}

  int letter() const { return letter_; }
  int iteration() const { return iteration_; }

 private:
  int letter_;
  int iteration_;
};

}  // namespace aslpv
