#include "qmsd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

namespace qmsd {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

const Json& require_key(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string(where) + ": missing field '" + key +
                          "'");
  }
  return j.at(key);
}

double number_at(const Json& j, const char* key, const char* where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_number()) {
    throw ValidationError(std::string(where) + ": field '" + key +
                          "' must be a number");
  }
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) {
    throw ValidationError(std::string("field '") + key +
                          "' must be a number");
  }
  return v.get<double>();
}

int int_or(const Json& j, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("field '") + key +
                          "' must be an integer");
  }
  return v.get<int>();
}

std::string string_at(const Json& j, const char* key, const char* where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_string()) {
    throw ValidationError(std::string(where) + ": field '" + key +
                          "' must be a string");
  }
  return v.get<std::string>();
}

std::string string_or(const Json& j, const char* key,
                      const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) {
    throw ValidationError(std::string("field '") + key +
                          "' must be a string");
  }
  return v.get<std::string>();
}

bool bool_or(const Json& j, const char* key, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_boolean()) {
    throw ValidationError(std::string("field '") + key +
                          "' must be a boolean");
  }
  return v.get<bool>();
}

GainSpec gain_from_json(const Json& cfg) {
  if (!cfg.contains("gain")) return GainSpec::isotropic(1.0);
  const Json& g = cfg.at("gain");
  double big_g = number_or(g, "g", 1.0);
  const bool has_s = g.is_object() && g.contains("s");
  const bool has_r = g.is_object() && g.contains("r");
  if (has_s && has_r) {
    throw ValidationError("gain: give either 's' or 'r', not both");
  }
  if (has_r) return GainSpec::from_gr(big_g, number_at(g, "r", "gain"));
  return GainSpec::from_gs(big_g, number_or(g, "s", 1.0));
}

KrausChannel build_channel(const Json& spec, int cutoff) {
  const std::string name = string_at(spec, "name", "channel");
  const FockSpace in(cutoff, 1);
  if (name == "identity") return identity_channel(in);
  if (name == "loss") return loss_channel(number_at(spec, "eta", "channel"), in);
  if (name == "amplifier") {
    std::optional<int> out;
    if (spec.contains("out_cutoff")) out = int_or(spec, "out_cutoff", 0);
    return amplifier_channel(number_at(spec, "gain", "channel"), in, out);
  }
  if (name == "heterodyne-mp" || name == "heterodyne-conjugate-mp") {
    HeterodyneOptions opts;
    opts.grid_step = number_or(spec, "grid_step", opts.grid_step);
    opts.grid_radius = number_or(spec, "grid_radius", opts.grid_radius);
    const FockSpace out(int_or(spec, "out_cutoff", cutoff), 1);
    const double g = number_at(spec, "gain", "channel");
    if (name == "heterodyne-mp") {
      return heterodyne_mp_channel(g, in, out, opts);
    }
    return heterodyne_conjugate_mp_channel(g, in, out, opts);
  }
  if (name == "half-bs") return half_bs_channel(in);
  if (name == "kraus") {
    const Json& mats = require_key(spec, "matrices", "channel");
    if (!mats.is_array() || mats.empty()) {
      throw ValidationError("channel: 'matrices' must be a non-empty array");
    }
    KrausChannel ch;
    ch.in = in;
    ch.out = FockSpace(int_or(spec, "out_cutoff", cutoff),
                       int_or(spec, "out_modes", 1));
    ch.label = "kraus-json";
    for (const Json& m : mats) {
      Matrix k = matrix_from_json(m);
      if (k.rows() != ch.out.dim() || k.cols() != ch.in.dim()) {
        throw ValidationError(
            "channel: Kraus matrix is " + std::to_string(k.rows()) + "x" +
            std::to_string(k.cols()) + ", expected " +
            std::to_string(ch.out.dim()) + "x" + std::to_string(ch.in.dim()));
      }
      ch.kraus.push_back(std::move(k));
    }
    const double tol = number_or(spec, "completeness_tol", 1e-6);
    const double dev = ch.completeness_deviation(std::min(10, cutoff - 1));
    if (dev > tol) {
      throw ValidationError("channel: completeness deviation " + fmt(dev) +
                            " on the low-photon block exceeds " + fmt(tol));
    }
    return ch;
  }
  throw ValidationError("channel: unknown name '" + name + "'");
}

std::pair<Operator, Operator> build_observables(const Json& cfg,
                                                const KrausChannel& ch,
                                                const GainSpec& gain,
                                                double lambda) {
  const FockSpace out = ch.out;
  Json obs = Json::object();
  if (cfg.contains("observables")) obs = cfg.at("observables");

  if (obs.contains("m") || obs.contains("n")) {
    Operator m(out, matrix_from_json(require_key(obs, "m", "observables")));
    Operator n(out, matrix_from_json(require_key(obs, "n", "observables")));
    if (!is_hermitian(m, 1e-8) || !is_hermitian(n, 1e-8)) {
      throw ValidationError("observables: readout matrices must be Hermitian");
    }
    return {std::move(m), std::move(n)};
  }

  const std::string preset = string_or(obs, "preset", "quadratures");
  if (preset == "quadratures") {
    const double sx = number_or(obs, "scale_x", 1.0);
    const double sp = number_or(obs, "scale_p", 1.0);
    QuadraturePair qx = quadratures(out, 0);
    QuadraturePair qp = quadratures(out, out.modes - 1);
    qx.x.mat *= sx;
    qp.p.mat *= sp;
    return {std::move(qx.x), std::move(qp.p)};
  }
  if (preset == "tuned-split") {
    // Readout scales that make the split-arm pair saturate the skewed
    // trade-off at the scenario's own gain and prior.
    if (out.modes != 2) {
      throw ValidationError(
          "observables: tuned-split needs a two-mode output");
    }
    const double kx = std::sqrt(2.0 * gain.eta_x) / (1.0 + lambda);
    const double kp = std::sqrt(2.0 * gain.eta_p) / (1.0 + lambda);
    QuadraturePair q0 = quadratures(out, 0);
    QuadraturePair q1 = quadratures(out, 1);
    q0.x.mat *= kx;
    q1.p.mat *= kp;
    return {std::move(q0.x), std::move(q1.p)};
  }
  throw ValidationError("observables: unknown preset '" + preset + "'");
}

double matched_deviation_term(double diff, double lambda, const char* axis) {
  if (std::abs(diff) < 1e-12) return 0.0;
  if (lambda <= 0.0) {
    throw ValidationError(
        std::string("analytic: the flat-prior deviation diverges along ") +
        axis + " unless the channel gain matches the probe gain");
  }
  return diff * diff / lambda;
}

// Closed-form deviations for the Gaussian zoo: a channel with amplitude
// gain mu and symmetric output noise s2 per quadrature has
//   V = scale^2 s2 + (scale mu -+ sqrt(eta))^2 / lambda.
MsdResult analytic_msd(const Json& channel_spec, const Json& cfg,
                       const GainSpec& gain, const GaussianPrior& prior) {
  const std::string name = string_at(channel_spec, "name", "channel");
  double mu = 1.0;
  double s2 = 0.5;
  bool conjugate = false;
  if (name == "identity") {
    mu = 1.0;
    s2 = 0.5;
  } else if (name == "loss") {
    const double eta = number_at(channel_spec, "eta", "channel");
    if (!(eta > 0.0) || eta > 1.0) {
      throw ValidationError("channel: loss eta must lie in (0, 1]");
    }
    mu = std::sqrt(eta);
    s2 = 0.5;
  } else if (name == "amplifier") {
    const double g0 = number_at(channel_spec, "gain", "channel");
    if (g0 < 1.0) throw ValidationError("channel: amplifier gain must be >= 1");
    mu = std::sqrt(g0);
    s2 = g0 - 0.5;
  } else if (name == "heterodyne-mp" || name == "heterodyne-conjugate-mp") {
    const double g = number_at(channel_spec, "gain", "channel");
    mu = g;
    s2 = g * g + 0.5;
    conjugate = (name == "heterodyne-conjugate-mp");
  } else {
    throw ValidationError("analytic: no closed form for channel '" + name +
                          "'");
  }

  Json obs = Json::object();
  if (cfg.contains("observables")) obs = cfg.at("observables");
  if (obs.contains("m") || obs.contains("n") ||
      string_or(obs, "preset", "quadratures") != "quadratures") {
    throw ValidationError(
        "analytic: only the plain quadrature readout has a closed form");
  }
  const double sx = number_or(obs, "scale_x", 1.0);
  const double sp = number_or(obs, "scale_p", 1.0);

  const double mu_x = sx * mu;
  const double mu_p = sp * (conjugate ? -mu : mu);
  MsdResult res;
  res.v_m_x = sx * sx * s2 +
              matched_deviation_term(mu_x - std::sqrt(gain.eta_x),
                                     prior.lambda, "x");
  res.v_n_p = sp * sp * s2 +
              matched_deviation_term(mu_p - std::sqrt(gain.eta_p),
                                     prior.lambda, "p");
  res.method = "analytic";
  res.prior = prior;
  res.gain = gain;
  return res;
}

Estimator estimator_from_json(const Json& j) {
  const int cutoff = int_or(j, "cutoff", 0);
  if (cutoff < 2) {
    throw ValidationError("estimator: 'cutoff' must be an integer >= 2");
  }
  const FockSpace space(cutoff, 1);
  const Json& elems = require_key(j, "povm", "estimator");
  if (!elems.is_array() || elems.empty()) {
    throw ValidationError("estimator: 'povm' must be a non-empty array");
  }
  Estimator est;
  for (const Json& e : elems) {
    est.povm.elements.emplace_back(space, matrix_from_json(e));
  }
  auto values = [&](const char* key) {
    const Json& arr = require_key(j, key, "estimator");
    if (!arr.is_array()) {
      throw ValidationError(std::string("estimator: '") + key +
                            "' must be an array of numbers");
    }
    RealVector v(arr.size());
    Eigen::Index i = 0;
    for (const Json& x : arr) {
      if (!x.is_number()) {
        throw ValidationError(std::string("estimator: '") + key +
                              "' must be an array of numbers");
      }
      v(i++) = x.get<double>();
    }
    return v;
  };
  est.x_values = values("x_values");
  est.p_values = values("p_values");
  return est;
}

Json result_to_json(const MsdResult& res) {
  Json j;
  j["method"] = res.method;
  j["v_x"] = res.v_m_x;
  j["v_p"] = res.v_n_p;
  j["trunc_error"] = res.trunc_error;
  j["stat_error"] = res.stat_error;
  return j;
}

Json report_to_json(const std::string& kind, const std::string& method,
                    const BoundReport& rep) {
  Json j;
  j["kind"] = kind;
  j["method"] = method;
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["slack"] = rep.slack;
  j["saturated"] = rep.saturated;
  j["violated"] = rep.violated;
  j["offset_negative"] = rep.offset_negative;
  return j;
}

// One product-form bound (B1/B2/B3/corollary) or offset check against one
// MSD result. `model` is needed only by the lemma.
BoundReport run_check(const std::string& kind, const Json& bspec,
                      const MsdResult& res, const MeasurementModel* model,
                      const GainSpec& gain, double lambda) {
  const double per_component = res.trunc_error + 3.0 * res.stat_error;
  if (kind == "channel-B1-upper" || kind == "channel-B1-lower" ||
      kind == "eb-B2" || kind == "joint-B3" || kind == "corollary") {
    BoundSpec spec{kind, {{"G", gain.gain()}, {"lambda", lambda}}};
    validate(spec);
    double rhs = 0.0;
    if (kind == "channel-B1-upper") {
      rhs = bound_channel(gain.gain(), lambda, BranchSign::upper);
    } else if (kind == "channel-B1-lower") {
      rhs = bound_channel(gain.gain(), lambda, BranchSign::lower);
    } else if (kind == "eb-B2") {
      rhs = bound_eb(gain.gain(), lambda);
    } else {
      rhs = bound_joint(gain.gain(), lambda);
    }
    const double budget =
        (std::abs(res.v_m_x) + std::abs(res.v_n_p)) * per_component;
    return make_report(res.v_m_x * res.v_n_p, rhs, budget);
  }
  if (kind == "sur2") {
    return sur2_check(res, gain.gain(), gain.skew(), lambda);
  }
  if (kind == "tangent") {
    const double t = number_or(bspec, "t", 1.0 / gain.skew());
    return tangent_check(res, gain.skew(), t);
  }
  if (kind == "lemma") {
    if (model == nullptr) {
      throw ValidationError("bound: the lemma check needs a channel model");
    }
    return lemma_check(res, commutator_expectation(*model, lambda));
  }
  if (kind == "mib") {
    const double g_x = number_or(bspec, "g_x", 1.0);
    const double g_p = number_or(bspec, "g_p", 1.0);
    const double sigma_x2 = number_or(bspec, "sigma_x2", 0.5);
    const double sigma_p2 = number_or(bspec, "sigma_p2", 0.5);
    const double rhs = mib_bound(g_x, g_p, sigma_x2, sigma_p2);
    const double lhs = g_x * res.v_m_x + g_p * res.v_n_p;
    return make_report(lhs, rhs, (g_x + g_p) * per_component);
  }
  throw ValidationError("bound: unknown kind '" + kind + "'");
}

struct CheckSummary {
  Json entries = Json::array();
  bool any_violated = false;
  bool saturation_mismatch = false;
};

CheckSummary run_checks(const Json& bspec, const std::vector<MsdResult>& results,
                        const MeasurementModel* model, const GainSpec& gain,
                        double lambda) {
  CheckSummary out;
  const std::string kind = string_at(bspec, "kind", "bound");
  const bool has_expect =
      bspec.is_object() && bspec.contains("expect_saturated");
  const bool expect_saturated = bool_or(bspec, "expect_saturated", false);
  for (const MsdResult& res : results) {
    BoundReport rep = run_check(kind, bspec, res, model, gain, lambda);
    Json entry = report_to_json(kind, res.method, rep);
    if (has_expect) {
      entry["expect_saturated"] = expect_saturated;
      if (rep.saturated != expect_saturated) out.saturation_mismatch = true;
    }
    out.entries.push_back(std::move(entry));
    out.any_violated = out.any_violated || rep.violated;
  }
  return out;
}

Json gain_to_json(const GainSpec& gain) {
  Json j;
  j["g"] = gain.gain();
  j["s"] = gain.skew();
  j["eta_x"] = gain.eta_x;
  j["eta_p"] = gain.eta_p;
  return j;
}

std::string summarize(const Json& report) {
  std::ostringstream os;
  os << report.at("name").get<std::string>() << ": "
     << report.at("status").get<std::string>() << "\n";
  for (const Json& r : report.at("results")) {
    os << "  [" << r.at("method").get<std::string>() << "] V_x="
       << fmt(r.at("v_x").get<double>()) << " V_p="
       << fmt(r.at("v_p").get<double>());
    const double se = r.at("stat_error").get<double>();
    if (se > 0.0) os << " (stat_error " << fmt(se) << ")";
    os << "\n";
  }
  for (const Json& c : report.at("checks")) {
    os << "  check " << c.at("kind").get<std::string>() << " ["
       << c.at("method").get<std::string>() << "]: lhs="
       << fmt(c.at("lhs").get<double>()) << " rhs="
       << fmt(c.at("rhs").get<double>());
    if (c.at("violated").get<bool>()) {
      os << " VIOLATED";
    } else if (c.at("saturated").get<bool>()) {
      os << " saturated";
    }
    os << "\n";
  }
  return os.str();
}

RunOutcome finish_outcome(Json report, bool any_violated, bool mismatch) {
  const int code = any_violated ? 2 : (mismatch ? 3 : 0);
  report["status"] =
      any_violated ? "violation" : (mismatch ? "mismatch" : "pass");
  RunOutcome out;
  out.summary = summarize(report);
  out.report = std::move(report);
  out.exit_code = code;
  return out;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row_re = Json::array();
    Json row_im = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row_re.push_back(m(r, c).real());
      row_im.push_back(m(r, c).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  Json j;
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Matrix matrix_from_json(const Json& j) {
  const Json& re = require_key(j, "re", "matrix");
  if (!re.is_array() || re.empty() || !re.at(0).is_array() ||
      re.at(0).empty()) {
    throw ValidationError("matrix: 're' must be a non-empty 2d array");
  }
  const auto rows = static_cast<Eigen::Index>(re.size());
  const auto cols = static_cast<Eigen::Index>(re.at(0).size());
  const bool has_im = j.contains("im");
  const Json* im = has_im ? &j.at("im") : nullptr;
  if (has_im && (!im->is_array() ||
                 static_cast<Eigen::Index>(im->size()) != rows)) {
    throw ValidationError("matrix: 'im' must match the shape of 're'");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row_re = re.at(r);
    if (!row_re.is_array() ||
        static_cast<Eigen::Index>(row_re.size()) != cols) {
      throw ValidationError("matrix: 're' rows must have equal length");
    }
    const Json* row_im = nullptr;
    if (has_im) {
      row_im = &im->at(r);
      if (!row_im->is_array() ||
          static_cast<Eigen::Index>(row_im->size()) != cols) {
        throw ValidationError("matrix: 'im' must match the shape of 're'");
      }
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& vr = row_re.at(c);
      if (!vr.is_number()) {
        throw ValidationError("matrix: entries must be numbers");
      }
      double vi = 0.0;
      if (row_im != nullptr) {
        const Json& v = row_im->at(c);
        if (!v.is_number()) {
          throw ValidationError("matrix: entries must be numbers");
        }
        vi = v.get<double>();
      }
      m(r, c) = Complex(vr.get<double>(), vi);
    }
  }
  return m;
}

std::vector<std::string> builtin_scenario_names() {
  return {"halfbs-saturation", "heterodyne-mp", "loss-covariant"};
}

Json builtin_scenario(const std::string& name) {
  if (name == "halfbs-saturation") {
    // Balanced splitter with readout scales tuned to the prior; sits exactly
    // on the skewed trade-off curve.
    return Json{
        {"version", 1},
        {"name", "halfbs-saturation"},
        {"channel", {{"name", "half-bs"}}},
        {"cutoff", 30},
        {"gain", {{"g", 1.0}, {"s", 1.0}}},
        {"lambda", 1.0},
        {"method", "quad"},
        {"observables", {{"preset", "tuned-split"}}},
        {"bound", {{"kind", "sur2"}, {"expect_saturated", true}}},
        {"expectations", {{"v_x", 0.5}, {"v_p", 0.5}, {"tol", 1e-4}}},
    };
  }
  if (name == "heterodyne-mp") {
    // Measure-and-prepare at unit gain under the flat prior; the closed form
    // gives 3/2 per quadrature and the product meets the measure-and-prepare
    // floor.
    return Json{
        {"version", 1},
        {"name", "heterodyne-mp"},
        {"channel", {{"name", "heterodyne-mp"}, {"gain", 1.0}}},
        {"cutoff", 25},
        {"gain", {{"g", 1.0}, {"s", 1.0}}},
        {"lambda", 0.0},
        {"method", "analytic"},
        {"bound", {{"kind", "eb-B2"}, {"expect_saturated", true}}},
        {"expectations", {{"v_x", 1.5}, {"v_p", 1.5}, {"tol", 1e-9}}},
    };
  }
  if (name == "loss-covariant") {
    // Pure loss probed at its own transmittance; the integrand is constant
    // in alpha and the product sits on the channel bound.
    return Json{
        {"version", 1},
        {"name", "loss-covariant"},
        {"channel", {{"name", "loss"}, {"eta", 0.5}}},
        {"cutoff", 30},
        {"gain", {{"g", 0.5}, {"s", 1.0}}},
        {"lambda", 1.0},
        {"method", "quad"},
        {"bound", {{"kind", "channel-B1-upper"}, {"expect_saturated", true}}},
        {"expectations", {{"v_x", 0.5}, {"v_p", 0.5}, {"tol", 1e-4}}},
    };
  }
  throw ValidationError("unknown built-in scenario '" + name +
                        "'; available: halfbs-saturation, heterodyne-mp, "
                        "loss-covariant");
}

RunOutcome run_scenario(const Json& config) {
  if (!config.is_object()) {
    throw ValidationError("scenario: config must be a JSON object");
  }
  const int version = int_or(config, "version", 1);
  if (version != 1) {
    throw ValidationError("scenario: unsupported version " +
                          std::to_string(version));
  }
  const std::string name = string_or(config, "name", "scenario");
  const double lambda = number_or(config, "lambda", 1.0);
  const GaussianPrior prior(lambda);
  const GainSpec gain = gain_from_json(config);
  const int cutoff = int_or(config, "cutoff", 30);
  const std::string method = string_or(config, "method", "quad");
  const auto seed = static_cast<std::uint64_t>(int_or(config, "seed", 1));
  const int samples = int_or(config, "samples", 10000);

  const bool has_estimator = config.contains("estimator");
  const bool has_channel = config.contains("channel");
  if (has_estimator == has_channel) {
    throw ValidationError(
        "scenario: exactly one of 'channel' or 'estimator' is required");
  }

  std::vector<MsdResult> results;
  std::optional<MeasurementModel> model;
  if (has_estimator) {
    if (method != "quad") {
      throw ValidationError(
          "scenario: estimators support only the 'quad' method");
    }
    Estimator est = estimator_from_json(config.at("estimator"));
    validate(est);
    const double r = -0.5 * std::log(gain.skew());
    auto [vx, vp] = mse_pair(est, gain.gain(), r, prior);
    MsdResult res;
    res.v_m_x = vx;
    res.v_n_p = vp;
    res.method = "estimator-mse";
    res.prior = prior;
    res.gain = gain;
    results.push_back(std::move(res));
  } else {
    KrausChannel ch = build_channel(config.at("channel"), cutoff);
    if (method == "analytic") {
      results.push_back(
          analytic_msd(config.at("channel"), config, gain, prior));
    } else {
      auto [m, n] = build_observables(config, ch, gain, lambda);
      model.emplace(
          MeasurementModel{std::move(ch), std::move(m), std::move(n)});
      std::vector<std::string> routes;
      if (method == "quad") {
        routes = {"quadrature"};
      } else if (method == "mc") {
        routes = {"monte-carlo"};
      } else if (method == "choi") {
        routes = {"choi"};
      } else if (method == "all") {
        routes = {"quadrature", "monte-carlo", "choi"};
      } else {
        throw ValidationError("scenario: unknown method '" + method + "'");
      }
      for (const std::string& route : routes) {
        if (route == "quadrature") {
          results.push_back(msd_quadrature(*model, gain, prior));
        } else if (route == "monte-carlo") {
          results.push_back(
              msd_monte_carlo(*model, gain, prior, samples, seed));
        } else {
          results.push_back(msd_choi(*model, gain, prior));
        }
      }
    }
  }

  CheckSummary checks;
  if (config.contains("bound")) {
    checks = run_checks(config.at("bound"), results,
                        model ? &*model : nullptr, gain, lambda);
  }

  bool value_mismatch = false;
  Json expectations;
  if (config.contains("expectations")) {
    const Json& ex = config.at("expectations");
    const double tol = number_or(ex, "tol", 1e-6);
    Json entries = Json::array();
    for (const MsdResult& res : results) {
      const double budget = tol + 3.0 * res.stat_error;
      for (const auto& [key, got] :
           {std::pair<const char*, double>{"v_x", res.v_m_x},
            std::pair<const char*, double>{"v_p", res.v_n_p}}) {
        if (!ex.contains(key)) continue;
        const double want = number_at(ex, key, "expectations");
        const bool ok = std::abs(got - want) <= budget;
        Json entry;
        entry["method"] = res.method;
        entry["field"] = key;
        entry["expected"] = want;
        entry["actual"] = got;
        entry["passed"] = ok;
        entries.push_back(std::move(entry));
        if (!ok) value_mismatch = true;
      }
    }
    expectations["tol"] = tol;
    expectations["entries"] = std::move(entries);
  }
  const bool mismatch = value_mismatch || checks.saturation_mismatch;

  Json results_json = Json::array();
  for (const MsdResult& res : results) results_json.push_back(result_to_json(res));

  Json report;
  report["name"] = name;
  report["lambda"] = lambda;
  report["gain"] = gain_to_json(gain);
  report["cutoff"] = cutoff;
  report["results"] = std::move(results_json);
  report["checks"] = std::move(checks.entries);
  if (!expectations.is_null()) {
    expectations["passed"] = !value_mismatch;
    report["expectations"] = std::move(expectations);
  }
  return finish_outcome(std::move(report), checks.any_violated, mismatch);
}

void validate(const CurveRequest& req) {
  if (!std::isfinite(req.big_g) || req.big_g <= 0.0) {
    throw ValidationError("curves: G must be positive");
  }
  if (!std::isfinite(req.lambda) || req.lambda < 0.0) {
    throw ValidationError("curves: lambda must be >= 0");
  }
  for (double s : req.s_values) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw ValidationError("curves: every s must be positive");
    }
  }
  for (double t : req.t_values) {
    if (!std::isfinite(t) || t <= 0.0) {
      throw ValidationError("curves: every t must be positive");
    }
  }
  if (req.vx_grid.empty()) {
    throw ValidationError("curves: the vx grid is empty");
  }
  double prev = 0.0;
  for (double vx : req.vx_grid) {
    if (!std::isfinite(vx) || vx <= prev) {
      throw ValidationError(
          "curves: the vx grid must be positive and strictly ascending");
    }
    prev = vx;
  }
}

namespace {

std::vector<std::string> curve_columns(const CurveRequest& req) {
  std::vector<std::string> cols = {"vx", "b1_upper", "b1_lower", "b3", "b2"};
  for (double s : req.s_values) cols.push_back("sur2_s" + fmt(s, "%g"));
  for (double t : req.t_values) cols.push_back("mib_t" + fmt(t, "%g"));
  return cols;
}

std::vector<double> curve_row(const CurveRequest& req, double vx) {
  const double big_g = req.big_g;
  const double lambda = req.lambda;
  std::vector<double> row = {
      vx,
      bound_channel(big_g, lambda, BranchSign::upper) / vx,
      bound_channel(big_g, lambda, BranchSign::lower) / vx,
      bound_joint(big_g, lambda) / vx,
      bound_eb(big_g, lambda) / vx,
  };
  const double c = big_g / (1.0 + lambda);
  for (double s : req.s_values) {
    const double off_x = c * s / 2.0;
    const double off_p = c / (2.0 * s);
    row.push_back(vx > off_x
                      ? off_p + 0.25 * c * c / (vx - off_x)
                      : std::numeric_limits<double>::quiet_NaN());
  }
  const double s0 = req.s_values.empty() ? 1.0 : req.s_values.front();
  for (double t : req.t_values) {
    // Tangent line to the s0 trade-off curve at slope parameter t.
    row.push_back(c / (2.0 * s0) + t * c - t * t * (vx - c * s0 / 2.0));
  }
  return row;
}

}  // namespace

std::string curves_csv(const CurveRequest& req) {
  validate(req);
  std::ostringstream os;
  const auto cols = curve_columns(req);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i > 0) os << ", ";
    os << cols[i];
  }
  os << "\n";
  for (double vx : req.vx_grid) {
    const auto row = curve_row(req, vx);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) os << ", ";
      os << fmt(row[i], "%.12g");
    }
    os << "\n";
  }
  return os.str();
}

Json curves_json(const CurveRequest& req) {
  validate(req);
  Json j;
  j["g"] = req.big_g;
  j["lambda"] = req.lambda;
  j["s"] = req.s_values;
  j["t"] = req.t_values;
  j["columns"] = curve_columns(req);
  Json rows = Json::array();
  for (double vx : req.vx_grid) {
    // Curves undefined left of their asymptote become explicit nulls.
    Json row = Json::array();
    for (double v : curve_row(req, vx)) {
      if (std::isfinite(v)) {
        row.push_back(v);
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

RunOutcome certify(const Json& device, double big_g, double s,
                   double lambda) {
  if (!device.is_object()) {
    throw ValidationError("certify: document must be a JSON object");
  }
  if (!(big_g > 0.0) || !std::isfinite(big_g)) {
    throw ValidationError("certify: G must be positive");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ValidationError("certify: s must be positive");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("certify: lambda must be positive");
  }
  const GaussianPrior prior(lambda);
  const GainSpec gain = GainSpec::from_gs(big_g, s);

  std::vector<MsdResult> results;
  Json checks = Json::array();
  bool any_violated = false;

  auto append = [&](const char* kind, const Json& bspec,
                    const MsdResult& res, const MeasurementModel* model) {
    BoundReport rep = run_check(kind, bspec, res, model, gain, lambda);
    checks.push_back(report_to_json(kind, res.method, rep));
    any_violated = any_violated || rep.violated;
  };

  const Json empty = Json::object();
  if (device.contains("estimator")) {
    Estimator est = estimator_from_json(device.at("estimator"));
    validate(est);
    const double r = -0.5 * std::log(s);
    auto [vx, vp] = mse_pair(est, big_g, r, prior);
    MsdResult res;
    res.v_m_x = vx;
    res.v_n_p = vp;
    res.method = "estimator-mse";
    res.prior = prior;
    res.gain = gain;
    results.push_back(std::move(res));
    append("corollary", empty, results.back(), nullptr);
  } else if (device.contains("channel")) {
    const int cutoff = int_or(device, "cutoff", 30);
    KrausChannel ch = build_channel(device.at("channel"), cutoff);
    auto [m, n] = build_observables(device, ch, gain, lambda);
    const double comm_scale =
        (m.mat * n.mat - n.mat * m.mat).cwiseAbs().maxCoeff();
    MeasurementModel model{std::move(ch), std::move(m), std::move(n)};
    results.push_back(msd_quadrature(model, gain, prior));
    append("lemma", empty, results.back(), &model);
    if (comm_scale < 1e-8) {
      // Commuting readout: the joint-measurement forms apply as well.
      append("sur2", empty, results.back(), &model);
      append("joint-B3", empty, results.back(), &model);
    }
  } else {
    throw ValidationError(
        "certify: document needs a 'channel' or 'estimator' entry");
  }

  Json results_json = Json::array();
  for (const MsdResult& res : results) results_json.push_back(result_to_json(res));

  Json report;
  report["name"] = string_or(device, "name", "device");
  report["lambda"] = lambda;
  report["gain"] = gain_to_json(gain);
  report["results"] = std::move(results_json);
  report["checks"] = std::move(checks);
  return finish_outcome(std::move(report), any_violated, false);
}

}  // namespace qmsd
