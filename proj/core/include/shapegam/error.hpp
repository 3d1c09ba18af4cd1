#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace shapegam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: bad shapes, non-positive weights, unknown tags.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A design or constraint matrix lost rank. `column()` names the offender
/// when one can be singled out.
class RankError : public InvalidInput {
 public:
  explicit RankError(const std::string& what, std::string column = {})
      : InvalidInput(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// Request exceeds a hard size guard (e.g. exponential enumeration).
class SizeError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// An iterative method stopped without meeting its optimality condition.
/// Carries the best iterate so callers can inspect or report it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd best_iterate,
                   double violation, int iterations)
      : Error(what),
        best_iterate_(std::move(best_iterate)),
        violation_(violation),
        iterations_(iterations) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_iterate_; }
  double violation() const noexcept { return violation_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Eigen::VectorXd best_iterate_;
  double violation_;
  int iterations_;
};

}  // namespace shapegam
