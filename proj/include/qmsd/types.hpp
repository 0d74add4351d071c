#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qmsd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shape or mode-structure mismatch between operands.
struct DimensionError : Error {
  using Error::Error;
};

/// A state or channel does not fit the requested cutoff to the
/// required accuracy.
struct TruncationError : Error {
  using Error::Error;
};

/// Invalid parameter values or objects failing their contract
/// (incomplete POVM, non-Hermitian observable, bad grid, ...).
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace qmsd
