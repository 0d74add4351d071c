#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qmsd/bayes_msd.hpp"

namespace qmsd {

// Discrete POVM: positive elements on a shared space summing to the
// identity. Continuum measurements enter as grid discretizations.
struct Povm {
  std::vector<Operator> elements;

  int n_outcomes() const { return static_cast<int>(elements.size()); }
  const FockSpace& space() const;
};

// Element positivity and completeness. Like channel completeness, the
// identity check is restricted to the low-photon block (total occupation
// <= min(10, cutoff - 1)): the top of a truncated space is never fully
// covered by a discretized continuum POVM.
void validate(const Povm& povm, double tol = 1e-6);

// POVM with a pair of per-outcome estimates: outcome i reports X_i for the
// x quadrature and P_i for p.
struct Estimator {
  Povm povm;
  RealVector x_values;
  RealVector p_values;
};

void validate(const Estimator& est);

// Common eigenbasis of a commuting Hermitian pair: columns of `basis` are
// orthonormal with M basis_i = a_i basis_i and N basis_i = b_i basis_i.
struct SimDiag {
  Matrix basis;
  RealVector a_values;
  RealVector b_values;
};

// Diagonalize M, then N inside each eigenvalue cluster of M (clusters are
// merged at 1e-9 relative spacing, which tolerates floating-point splitting
// of degenerate levels). Requires ||[M, N]||_F < tol.
SimDiag simultaneous_diagonalize(const Operator& m, const Operator& n,
                                 double tol = 1e-8);

// The measure-and-prepare model equivalent to an estimator: the channel
// measures the POVM and writes outcome i into a classical two-register
// state |i>|i>, and the readouts are M = sum_i X_i |i><i| (x) 1 and
// N = 1 (x) sum_i P_i |i><i|, which commute by construction. The register
// pair needs max(2, k)^2 dimensions, so the outcome count is capped at 64;
// discretize coarser or evaluate mse_pair directly beyond that.
MeasurementModel estimator_to_model(const Estimator& est);

// The estimator equivalent to a model with commuting readouts: diagonalize
// (M, N) jointly into |w_i> with eigenvalue pairs (a_i, b_i), and pull each
// projector back through the channel, m_i = sum_j K_j^dag |w_i><w_i| K_j.
// That ordering (not its mirror image) makes each m_i positive on the input
// space and the family complete, since sum_j K_j^dag K_j = 1.
Estimator model_to_estimator(const MeasurementModel& model);

// Random POVM with `n_outcomes` elements on a dim-dimensional single-mode
// space: random Wishart factors, symmetrically normalized by the inverse
// square root of their sum. Deterministic in the seed.
Povm random_povm(int dim, int n_outcomes, std::uint64_t seed);

// Bayesian mean-square errors (V_X, V_P) of the estimator against targets
// (sqrt(G) e^{-R} x_alpha, sqrt(G) e^{R} p_alpha) over the Gaussian-weighted
// coherent ensemble, by Gauss-Hermite quadrature. Requires lambda > 0.
std::pair<double, double> mse_pair(const Estimator& est, double big_g,
                                   double r, const GaussianPrior& prior,
                                   int order = 20);

}  // namespace qmsd
