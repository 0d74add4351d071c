#pragma once

#include <map>
#include <string>

#include "qmsd/bayes_msd.hpp"

namespace qmsd {

// Branch of the channel deviation bound: `upper` for amplification and
// attenuation of the signal itself, `lower` for the phase-conjugate branch.
enum class BranchSign { upper, lower };

// Label plus parameter bag identifying one inequality instance, used by the
// certification output. `kind` is one of:
//   channel-B1-upper, channel-B1-lower, eb-B2, joint-B3, lemma, sur2,
//   corollary, mib, tangent
// and `params` holds the fields that kind consumes (G, lambda, eta, s, t,
// g_x, g_p, sigma_x2, sigma_p2).
struct BoundSpec {
  std::string kind;
  std::map<std::string, double> params;
};

// Throws ValidationError if `kind` is unknown, a parameter the kind needs is
// missing or non-finite, or a parameter is out of its domain.
void validate(const BoundSpec& spec);

// Two sides of one inequality instance. Saturation is judged at 1e-5
// relative to the larger side; a violation requires slack below minus
// (1e-6 plus the caller's numerical error budget), so that cutoff and
// sampling noise are never reported as theory failures.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool saturated = false;
  bool violated = false;
  // One of the offset-subtracted deviations came out negative. Only the
  // product checkers set this; it signals an error budget larger than the
  // deviation itself, not a theory violation.
  bool offset_negative = false;
};

BoundReport make_report(double lhs, double rhs, double error_budget = 0.0);

// Deviation-product bound for a quantum channel probed at gain G under a
// Gaussian prior of precision lambda, with g = G/(1+lambda):
//   V_x V_p >= (1/4) (g + |g -+ 1|)^2
// (minus for the upper branch, plus for the phase-conjugate lower branch,
// where the bound coincides with bound_eb).
double bound_channel(double gain, double lambda, BranchSign sign);

// Entanglement-breaking (measure-and-prepare) channel bound,
// (1/4) (2g + 1)^2.
double bound_eb(double gain, double lambda);

// Joint-measurement bound for commuting readouts, g^2.
double bound_joint(double gain, double lambda);

// <[M, N]> on the output of the model's channel fed with the thermal state
// of mean photon number 1/lambda (the reduced correlation state). Purely
// imaginary for Hermitian readouts. Requires lambda > 0.
Complex commutator_expectation(const MeasurementModel& model, double lambda);

// Offset-product lower bound for a general (not necessarily commuting)
// readout pair:
//   (V_M - eta_x/(2(1+lambda))) (V_N - eta_p/(2(1+lambda)))
//     >= (1/4) |<[M,N]> - i sqrt(eta_x eta_p)/(1+lambda)|^2.
// Gain and prior are taken from the MsdResult; the commutator expectation
// must come from the same model and lambda.
BoundReport lemma_check(const MsdResult& msd, Complex commutator_expectation);

// Skewed trade-off for commuting readouts at gains (eta s, eta / s):
//   (V_M - eta s/(2(1+lambda))) (V_N - eta/(2 s (1+lambda)))
//     >= (1/4) (eta/(1+lambda))^2.
// eta, s, lambda must match the MsdResult's gain and prior.
BoundReport sur2_check(const MsdResult& msd, double eta, double s,
                       double lambda);

// Most-informative weighted-sum bound for a pure Gaussian reference with
// sigma_x^2 sigma_p^2 = 1/4:
//   g_x V_x + g_p V_p >= g_x sigma_x^2 + g_p sigma_p^2 + sqrt(g_x g_p).
// Mixed references are rejected.
double mib_bound(double g_x, double g_p, double sigma_x2, double sigma_p2);

// Tangent-line form of the skewed trade-off: for weights t > 0,
//   t (V_M - eta s/(2(1+lambda))) + (1/t) (V_N - eta/(2 s (1+lambda)))
//     >= eta/(1+lambda).
// s must equal the skew of the MsdResult's gain.
BoundReport tangent_check(const MsdResult& msd, double s, double t);

}  // namespace qmsd
