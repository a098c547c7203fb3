#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace obv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs whose dimensions or degrees do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller-side precondition does not hold (boundary point passed as interior, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A coefficient function could not be evaluated at (or near) a point.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, Vec point) : Error(what + " at " + format(point)), point_(std::move(point)) {}
  const Vec& point() const { return point_; }

  static std::string format(const Vec& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
  }

 private:
  Vec point_;
};

// A linear system turned out rank deficient or left a residual above tolerance.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, Vec singular_values, double residual = 0.0)
      : Error(what + " (singular values " + DomainError::format(singular_values) +
              ", residual " + std::to_string(residual) + ")"),
        singular_values_(std::move(singular_values)),
        residual_(residual) {}
  const Vec& singular_values() const { return singular_values_; }
  double residual() const { return residual_; }

 private:
  Vec singular_values_;
  double residual_;
};

// An iterative procedure (flow, projection) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace obv
