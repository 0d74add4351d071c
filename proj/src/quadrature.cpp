#include "qmsd/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace qmsd {

GaussHermiteRule gauss_hermite(int order) {
  if (order < 8) {
    throw ValidationError("gauss_hermite: order must be >= 8, got " +
                          std::to_string(order));
  }
  RealVector diag = RealVector::Zero(order);
  RealVector subdiag(order - 1);
  for (int k = 1; k < order; ++k) {
    subdiag(k - 1) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error("gauss_hermite: tridiagonal eigensolve failed");
  }
  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(order);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < order; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights(i) = sqrt_pi * v0 * v0;
  }
  return rule;
}

}  // namespace qmsd
