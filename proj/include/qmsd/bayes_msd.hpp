#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "qmsd/channels.hpp"

namespace qmsd {

// Gaussian phase-space prior (lambda/pi) exp(-lambda |alpha|^2); the mean
// photon number of the ensemble is 1/lambda. lambda = 0 denotes the
// uniform-prior limit, which only the closed-form bounds accept.
struct GaussianPrior {
  double lambda = 1.0;
  GaussianPrior() = default;
  explicit GaussianPrior(double lambda_);
};

// Measurement gains (eta_x, eta_p), equivalently (G, s) or (G, R) with
// eta_x = G s = G e^(-2R) and eta_p = G / s = G e^(2R).
struct GainSpec {
  double eta_x = 1.0;
  double eta_p = 1.0;

  static GainSpec isotropic(double g);
  static GainSpec from_gs(double g, double s);
  static GainSpec from_gr(double g, double r);

  double gain() const { return std::sqrt(eta_x * eta_p); }
  double skew() const { return std::sqrt(eta_x / eta_p); }
  double tau_x(double lambda) const { return eta_x / (1.0 + lambda); }
  double tau_p(double lambda) const { return eta_p / (1.0 + lambda); }
};

// A channel with a pair of Hermitian readout observables on its output
// space. For joint-measurement claims the pair must commute; the MSD
// functionals themselves are defined for any Hermitian pair, so this type
// does not enforce commutation.
struct MeasurementModel {
  KrausChannel channel;
  Operator m;
  Operator n;
};

struct MsdResult {
  double v_m_x = 0.0;
  double v_n_p = 0.0;
  std::string method;
  GaussianPrior prior;
  GainSpec gain;
  double stat_error = 0.0;   // Monte Carlo standard error, 0 otherwise
  double trunc_error = 0.0;  // cutoff-induced error budget
};

// Mean-square deviations of (M from sqrt(eta_x) x_alpha) and
// (N from sqrt(eta_p) p_alpha) over the Gaussian-weighted coherent
// ensemble, by tensor Gauss-Hermite quadrature of the prior integral.
MsdResult msd_quadrature(const MeasurementModel& model, const GainSpec& gain,
                         const GaussianPrior& prior, int order = 20);

// Same functional, sampled: Re/Im alpha are independent zero-mean Gaussians
// of variance 1/(2 lambda). Deterministic for a fixed seed. At least two
// samples are required to estimate the standard error; accuracy needs
// thousands.
MsdResult msd_monte_carlo(const MeasurementModel& model, const GainSpec& gain,
                          const GaussianPrior& prior, int n_samples,
                          std::uint64_t seed);

// Mean of the two deviation integrands over an explicit amplitude list (the
// building block of the Monte Carlo route). With a single alpha = 0 this is
// exactly the vacuum-input deviation pair.
std::pair<double, double> msd_sample_mean(const MeasurementModel& model,
                                          const GainSpec& gain,
                                          std::span<const Complex> alphas,
                                          double* trunc_error = nullptr);

// Correlation route: V_M = tr[(M_A - sqrt(tau_x) x_B)^2 J] + tau_x / 2 and
// V_N = tr[(N_A + sqrt(tau_p) p_B)^2 J] + tau_p / 2 on the channel's
// squeezed-vacuum correlation state, with tau = eta / (1 + lambda). Note the
// sign asymmetry: minus for the x pair, plus for the p pair. Evaluated by
// streaming over Kraus factors; the correlation state is never materialized.
MsdResult msd_choi(const MeasurementModel& model, const GainSpec& gain,
                   const GaussianPrior& prior);

}  // namespace qmsd
