#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "qmsd/types.hpp"

namespace qmsd {

/// Default ceiling on the probability mass a state construction may discard
/// when truncating to a finite Fock cutoff.
constexpr double kDefaultTailTol = 1e-6;

/// Truncated bosonic Hilbert space: `modes` modes with `cutoff` levels each
/// (occupation numbers 0 .. cutoff-1). Basis index of |n_0, ..., n_{m-1}> is
/// sum_j n_j * cutoff^(m-1-j), i.e. mode 0 varies slowest.
struct FockSpace {
  int cutoff = 2;
  int modes = 1;

  FockSpace() = default;
  explicit FockSpace(int cutoff_, int modes_ = 1);

  Eigen::Index dim() const;
  bool operator==(const FockSpace&) const = default;
};

/// Classical coherent amplitude alpha with its quadrature means
/// x = (alpha + conj(alpha)) / sqrt(2),  p = (alpha - conj(alpha)) / (sqrt(2) i).
struct CoherentAmplitude {
  Complex alpha;

  double x() const { return std::numbers::sqrt2 * alpha.real(); }
  double p() const { return std::numbers::sqrt2 * alpha.imag(); }
};

/// Dense complex matrix tied to a FockSpace. Carrier for states, observables
/// and POVM elements alike; validity predicates are free functions below.
struct Operator {
  FockSpace space;
  Matrix mat;

  Operator() = default;
  Operator(FockSpace space_, Matrix mat_);
};

/// Pure state as an amplitude vector, with the probability mass that was
/// discarded by the cutoff before renormalization.
struct PreparedVector {
  FockSpace space;
  Vector amps;
  double tail_mass = 0.0;
};

/// Density operator plus the discarded tail mass of its construction.
struct PreparedState {
  Operator rho;
  double tail_mass = 0.0;
};

/// Annihilation operator of one mode: <n-1| a |n> = sqrt(n).
Matrix annihilation_matrix(int cutoff);
Operator annihilation(const FockSpace& space, int mode = 0);

/// Quadratures x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(sqrt(2) i) of one
/// mode, embedded into the full space. [x, p] = i away from the top level.
struct QuadraturePair {
  Operator x;
  Operator p;
};
QuadraturePair quadratures(const FockSpace& space, int mode = 0);

/// Number operator a^dag a of one mode.
Operator number_op(const FockSpace& space, int mode = 0);

/// Cutoff heuristic that keeps the Poisson tail of |alpha> negligible.
int recommended_cutoff(Complex alpha);

/// Truncated, renormalized coherent amplitudes c_n = exp(-|a|^2/2) a^n/sqrt(n!)
/// on a single-mode space. Throws TruncationError if the discarded Poisson
/// tail exceeds max_tail.
PreparedVector coherent_vector(Complex alpha, const FockSpace& space,
                               double max_tail = kDefaultTailTol);

/// Unnormalized truncated coherent coefficients (the projection of the ideal
/// state onto the cutoff space). Used for measurement-side resolutions where
/// the projected continuum POVM is the faithful discretization.
Vector coherent_vector_raw(Complex alpha, int cutoff);

PreparedState coherent_state(CoherentAmplitude amp, const FockSpace& space,
                             double max_tail = kDefaultTailTol);

/// Two-mode squeezed vector sqrt(lambda/(1+lambda)) sum_n (1+lambda)^(-n/2)
/// |n,n>. Mean photon number per mode is 1/lambda; the reduced state of
/// either mode is thermal.
PreparedVector two_mode_squeezed_vector(double lambda, const FockSpace& space,
                                        double max_tail = kDefaultTailTol);
PreparedState two_mode_squeezed(double lambda, const FockSpace& space,
                                double max_tail = kDefaultTailTol);

/// Single-mode thermal state with the given mean photon number.
PreparedState thermal_state(double mean_photons, const FockSpace& space,
                            double max_tail = kDefaultTailTol);

/// Beam-splitter unitary at transmittance T on a two-mode space, phase-free
/// (x-type) coupling: coherent amplitudes map as
///   (alpha, beta) -> (sqrt(T) alpha - sqrt(1-T) beta,
///                     sqrt(1-T) alpha + sqrt(T) beta),
/// so at T = 1/2 the input |alpha>|0> goes to |alpha/sqrt(2)>|alpha/sqrt(2)>.
/// Built blockwise over total photon number; exactly unitary at any cutoff.
Operator beam_splitter(double transmittance, const FockSpace& space);

/// Kronecker product; the left factor varies slowest. Cutoffs must agree.
Operator tensor(const Operator& a, const Operator& b);

/// Trace out all modes not listed in `keep` (ascending mode indices).
Operator partial_trace(const Operator& op, std::span<const int> keep);

bool is_hermitian(const Operator& op, double tol = 1e-10);
bool is_positive_semidefinite(const Operator& op, double tol = 1e-10);
bool is_density(const Operator& op, double tol = 1e-8);

/// tr(a * b), evaluated without forming the product.
Complex trace_product(const Matrix& a, const Matrix& b);

/// tr(obs * rho).
Complex expectation(const Operator& obs, const Operator& rho);

/// Basis indices whose total occupation is <= max_total.
std::vector<Eigen::Index> low_photon_indices(const FockSpace& space,
                                             int max_total);

/// Spectral norm of (a - identity) restricted to the low-photon block.
double block_deviation_from_identity(const Matrix& a, const FockSpace& space,
                                     int max_total);

}  // namespace qmsd
