#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace flab {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// An argument violates the precondition of the operation it was passed to.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not be carried out numerically (singular state,
/// non-positive Gram matrix, ...). Carries the name of the failing operation.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string operation, const std::string& message)
      : std::runtime_error(operation + ": " + message),
        operation_(std::move(operation)) {}

  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

}  // namespace flab
