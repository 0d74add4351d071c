#include "qmsd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qmsd {

namespace {

constexpr double kSaturationRelTol = 1e-5;
constexpr double kViolationAbsTol = 1e-6;

double reduced_gain(double gain, double lambda) {
  if (!std::isfinite(gain) || gain < 0.0) {
    throw ValidationError("bound gain must be finite and nonnegative");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ValidationError("bound lambda must be finite and nonnegative");
  }
  return gain / (1.0 + lambda);
}

double msd_error_budget(const MsdResult& msd) {
  return msd.trunc_error + 3.0 * msd.stat_error;
}

void require_close(double actual, double expected, const char* what) {
  const double scale = std::max({1.0, std::abs(actual), std::abs(expected)});
  if (std::abs(actual - expected) > 1e-9 * scale) {
    throw ValidationError(std::string(what) +
                          " disagrees with the msd's gain or prior");
  }
}

}  // namespace

BoundReport make_report(double lhs, double rhs, double error_budget) {
  BoundReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.slack = lhs - rhs;
  const double budget = std::max(error_budget, 0.0);
  rep.violated = rep.slack < -(kViolationAbsTol + budget);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
  rep.saturated = !rep.violated && std::abs(rep.slack) <= kSaturationRelTol * scale;
  return rep;
}

double bound_channel(double gain, double lambda, BranchSign sign) {
  const double g = reduced_gain(gain, lambda);
  const double shifted =
      sign == BranchSign::upper ? std::abs(g - 1.0) : g + 1.0;
  const double root = 0.5 * (g + shifted);
  return root * root;
}

double bound_eb(double gain, double lambda) {
  const double g = reduced_gain(gain, lambda);
  const double root = g + 0.5;
  return root * root;
}

double bound_joint(double gain, double lambda) {
  const double g = reduced_gain(gain, lambda);
  return g * g;
}

Complex commutator_expectation(const MeasurementModel& model, double lambda) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    throw ValidationError(
        "commutator expectation needs lambda > 0; the uniform-prior limit "
        "has no normalizable reference state");
  }
  const PreparedState ref =
      thermal_state(1.0 / lambda, model.channel.in, 1e-3);
  const Operator out = model.channel.apply(ref.rho);
  const Matrix comm = model.m.mat * model.n.mat - model.n.mat * model.m.mat;
  return trace_product(comm, out.mat);
}

BoundReport lemma_check(const MsdResult& msd, Complex commutator_expectation) {
  const double denom = 1.0 + msd.prior.lambda;
  const double ax = msd.v_m_x - 0.5 * msd.gain.eta_x / denom;
  const double bp = msd.v_n_p - 0.5 * msd.gain.eta_p / denom;
  const Complex target(0.0,
                       std::sqrt(msd.gain.eta_x * msd.gain.eta_p) / denom);
  const double rhs = 0.25 * std::norm(commutator_expectation - target);
  BoundReport rep = make_report(ax * bp, rhs, msd_error_budget(msd));
  rep.offset_negative = ax < 0.0 || bp < 0.0;
  return rep;
}

BoundReport sur2_check(const MsdResult& msd, double eta, double s,
                       double lambda) {
  if (!std::isfinite(eta) || eta <= 0.0 || !std::isfinite(s) || s <= 0.0) {
    throw ValidationError("sur2 check requires eta > 0 and s > 0");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ValidationError("sur2 check requires lambda >= 0");
  }
  require_close(msd.gain.eta_x, eta * s, "sur2 eta*s");
  require_close(msd.gain.eta_p, eta / s, "sur2 eta/s");
  require_close(msd.prior.lambda, lambda, "sur2 lambda");

  const double denom = 1.0 + lambda;
  const double ax = msd.v_m_x - 0.5 * eta * s / denom;
  const double bp = msd.v_n_p - 0.5 * (eta / s) / denom;
  const double half_eta = 0.5 * eta / denom;
  BoundReport rep =
      make_report(ax * bp, half_eta * half_eta, msd_error_budget(msd));
  rep.offset_negative = ax < 0.0 || bp < 0.0;
  return rep;
}

double mib_bound(double g_x, double g_p, double sigma_x2, double sigma_p2) {
  if (!std::isfinite(g_x) || g_x < 0.0 || !std::isfinite(g_p) || g_p < 0.0) {
    throw ValidationError("mib weights must be finite and nonnegative");
  }
  if (!std::isfinite(sigma_x2) || sigma_x2 <= 0.0 ||
      !std::isfinite(sigma_p2) || sigma_p2 <= 0.0 ||
      std::abs(sigma_x2 * sigma_p2 - 0.25) > 1e-9) {
    throw ValidationError(
        "mib bound holds for pure Gaussian references only: "
        "sigma_x^2 sigma_p^2 = 1/4");
  }
  return g_x * sigma_x2 + g_p * sigma_p2 + std::sqrt(g_x * g_p);
}

BoundReport tangent_check(const MsdResult& msd, double s, double t) {
  if (!std::isfinite(s) || s <= 0.0 || !std::isfinite(t) || t <= 0.0) {
    throw ValidationError("tangent check requires s > 0 and t > 0");
  }
  require_close(msd.gain.skew(), s, "tangent skew");
  const double eta = msd.gain.gain();
  const double denom = 1.0 + msd.prior.lambda;
  const double ax = msd.v_m_x - 0.5 * eta * s / denom;
  const double bp = msd.v_n_p - 0.5 * (eta / s) / denom;
  return make_report(t * ax + bp / t, eta / denom, msd_error_budget(msd));
}

void validate(const BoundSpec& spec) {
  static const std::map<std::string, std::vector<const char*>> kRequired = {
      {"channel-B1-upper", {"G", "lambda"}},
      {"channel-B1-lower", {"G", "lambda"}},
      {"eb-B2", {"G", "lambda"}},
      {"joint-B3", {"G", "lambda"}},
      {"corollary", {"G", "lambda"}},
      {"lemma", {"G", "lambda"}},
      {"sur2", {"eta", "s", "lambda"}},
      {"mib", {"g_x", "g_p", "sigma_x2", "sigma_p2"}},
      {"tangent", {"s", "t"}},
  };
  const auto it = kRequired.find(spec.kind);
  if (it == kRequired.end()) {
    throw ValidationError("unknown bound kind: " + spec.kind);
  }
  for (const char* key : it->second) {
    const auto param = spec.params.find(key);
    if (param == spec.params.end() || !std::isfinite(param->second)) {
      throw ValidationError("bound " + spec.kind + " needs finite parameter " +
                            key);
    }
  }
  const auto positive = [&](const char* key) {
    const auto param = spec.params.find(key);
    return param == spec.params.end() || param->second > 0.0;
  };
  const auto nonnegative = [&](const char* key) {
    const auto param = spec.params.find(key);
    return param == spec.params.end() || param->second >= 0.0;
  };
  if (!nonnegative("G") || !nonnegative("lambda") || !nonnegative("g_x") ||
      !nonnegative("g_p")) {
    throw ValidationError("bound " + spec.kind +
                          " parameters must be nonnegative");
  }
  if (!positive("s") || !positive("t") || !positive("eta")) {
    throw ValidationError("bound " + spec.kind +
                          " parameters s, t, eta must be positive");
  }
}

}  // namespace qmsd
