#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lsicert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for malformed arguments: dimension mismatch, nonpositive scales,
/// unnormalized weights, unreadable files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative solver or quadrature does not reach its tolerance.
/// Carries the last residual so callers can report it.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace lsicert
