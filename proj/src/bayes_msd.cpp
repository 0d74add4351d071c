#include "qmsd/bayes_msd.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "qmsd/quadrature.hpp"

namespace qmsd {

GaussianPrior::GaussianPrior(double lambda_) : lambda(lambda_) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("prior lambda must be finite and >= 0");
  }
}

GainSpec GainSpec::isotropic(double g) { return from_gs(g, 1.0); }

GainSpec GainSpec::from_gs(double g, double s) {
  if (!(g >= 0.0) || !std::isfinite(g)) {
    throw ValidationError("gain G must be finite and >= 0");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ValidationError("gain asymmetry s must be finite and > 0");
  }
  GainSpec spec;
  spec.eta_x = g * s;
  spec.eta_p = g / s;
  return spec;
}

GainSpec GainSpec::from_gr(double g, double r) {
  return from_gs(g, std::exp(-2.0 * r));
}

namespace {

// Spectral-norm upper bound via the row/column-sum (Schur) estimate; used
// only to size truncation-error budgets.
double norm_bound(const Matrix& a) {
  double row = 0.0, col = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    row = std::max(row, a.row(i).cwiseAbs().sum());
  }
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    col = std::max(col, a.col(j).cwiseAbs().sum());
  }
  return std::sqrt(row * col);
}

// Heisenberg pull-backs of the observables through the channel: dense
// input-space matrices turning every per-amplitude evaluation into a few
// quadratic forms, whatever the output dimension or outcome count.
struct PulledBack {
  Matrix a2x, a1x, a2p, a1p, comp;  // E*(M^2), E*(M), E*(N^2), E*(N), E*(1)
  double norm_m = 0.0, norm_n = 0.0;

  // Per-outcome first/second moments of the prepared states (factored form
  // only); reused by the streaming correlation route.
  RealVector m1, m2, n1, n2;
};

PulledBack pull_back(const MeasurementModel& model) {
  const KrausChannel& ch = model.channel;
  if (model.m.space != ch.out || model.n.space != ch.out) {
    throw DimensionError("observables must act on the channel output space");
  }
  if (!is_hermitian(model.m, 1e-8) || !is_hermitian(model.n, 1e-8)) {
    throw ValidationError("measurement observables must be Hermitian");
  }
  const Eigen::Index din = ch.in.dim();
  PulledBack pb;
  pb.norm_m = norm_bound(model.m.mat);
  pb.norm_n = norm_bound(model.n.mat);
  if (ch.factored()) {
    const Eigen::Index k = ch.n_kraus();
    pb.m1.resize(k);
    pb.m2.resize(k);
    pb.n1.resize(k);
    pb.n2.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto p = ch.prepared.col(i);
      const Vector mp = model.m.mat * p;
      const Vector np = model.n.mat * p;
      pb.m1(i) = p.dot(mp).real();
      pb.m2(i) = mp.squaredNorm();
      pb.n1(i) = p.dot(np).real();
      pb.n2(i) = np.squaredNorm();
    }
    const Matrix meas_adj = ch.measured.adjoint();
    const auto weighted = [&](const RealVector& w) {
      Matrix scaled = ch.measured;
      for (Eigen::Index i = 0; i < k; ++i) scaled.col(i) *= w(i);
      return Matrix(scaled * meas_adj);
    };
    pb.a1x = weighted(pb.m1);
    pb.a2x = weighted(pb.m2);
    pb.a1p = weighted(pb.n1);
    pb.a2p = weighted(pb.n2);
    pb.comp = ch.measured * meas_adj;
  } else {
    pb.a2x = Matrix::Zero(din, din);
    pb.a1x = Matrix::Zero(din, din);
    pb.a2p = Matrix::Zero(din, din);
    pb.a1p = Matrix::Zero(din, din);
    pb.comp = Matrix::Zero(din, din);
    for (const Matrix& kr : ch.kraus) {
      const Matrix mk = model.m.mat * kr;
      const Matrix nk = model.n.mat * kr;
      pb.a2x.noalias() += mk.adjoint() * mk;
      pb.a1x.noalias() += kr.adjoint() * mk;
      pb.a2p.noalias() += nk.adjoint() * nk;
      pb.a1p.noalias() += kr.adjoint() * nk;
      pb.comp.noalias() += kr.adjoint() * kr;
    }
  }
  return pb;
}

struct SampleValue {
  double fx = 0.0;
  double fp = 0.0;
  double err_x = 0.0;
  double err_p = 0.0;
};

class DeviationEvaluator {
 public:
  DeviationEvaluator(const MeasurementModel& model, const GainSpec& gain)
      : model_(model), gain_(gain), pb_(pull_back(model)) {
    if (model.channel.in.modes != 1) {
      throw DimensionError(
          "coherent-ensemble routes need a single-mode channel input");
    }
  }

  SampleValue operator()(Complex alpha) const {
    PreparedVector v = coherent_vector(alpha, model_.channel.in, 1.0);
    const auto form = [&](const Matrix& a) {
      return (v.amps.adjoint() * a * v.amps).value().real();
    };
    const double s0 = form(pb_.comp);
    const double xa = CoherentAmplitude{alpha}.x();
    const double pa = CoherentAmplitude{alpha}.p();
    const double rx = std::sqrt(gain_.eta_x);
    const double rp = std::sqrt(gain_.eta_p);
    SampleValue val;
    val.fx = form(pb_.a2x) - 2.0 * rx * xa * form(pb_.a1x) +
             gain_.eta_x * xa * xa * s0;
    val.fp = form(pb_.a2p) - 2.0 * rp * pa * form(pb_.a1p) +
             gain_.eta_p * pa * pa * s0;
    const double defect = v.tail_mass + std::abs(s0 - 1.0);
    val.err_x = defect * std::pow(pb_.norm_m + rx * std::abs(xa), 2);
    val.err_p = defect * std::pow(pb_.norm_n + rp * std::abs(pa), 2);
    return val;
  }

  const PulledBack& pulled() const { return pb_; }

 private:
  const MeasurementModel& model_;
  GainSpec gain_;
  PulledBack pb_;
};

void require_positive_lambda(const GaussianPrior& prior) {
  if (!(prior.lambda > 0.0)) {
    throw ValidationError(
        "numeric MSD routes require lambda > 0; the uniform-prior limit is "
        "served by the closed-form bounds only");
  }
}

}  // namespace

MsdResult msd_quadrature(const MeasurementModel& model, const GainSpec& gain,
                         const GaussianPrior& prior, int order) {
  require_positive_lambda(prior);
  const GaussHermiteRule rule = gauss_hermite(order);
  const DeviationEvaluator eval(model, gain);
  const double scale = 1.0 / std::sqrt(prior.lambda);

  MsdResult res;
  res.method = "quadrature";
  res.prior = prior;
  res.gain = gain;
  double ex = 0.0, ep = 0.0;
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const double w =
          rule.weights(i) * rule.weights(j) / std::numbers::pi;
      const Complex alpha(scale * rule.nodes(i), scale * rule.nodes(j));
      const SampleValue val = eval(alpha);
      res.v_m_x += w * val.fx;
      res.v_n_p += w * val.fp;
      ex += w * val.err_x;
      ep += w * val.err_p;
    }
  }
  res.trunc_error = std::max(ex, ep);
  return res;
}

std::pair<double, double> msd_sample_mean(const MeasurementModel& model,
                                          const GainSpec& gain,
                                          std::span<const Complex> alphas,
                                          double* trunc_error) {
  if (alphas.empty()) {
    throw ValidationError("msd_sample_mean needs at least one amplitude");
  }
  const DeviationEvaluator eval(model, gain);
  double fx = 0.0, fp = 0.0, err = 0.0;
  for (Complex alpha : alphas) {
    const SampleValue val = eval(alpha);
    fx += val.fx;
    fp += val.fp;
    err += std::max(val.err_x, val.err_p);
  }
  const double n = static_cast<double>(alphas.size());
  if (trunc_error != nullptr) {
    *trunc_error = err / n;
  }
  return {fx / n, fp / n};
}

MsdResult msd_monte_carlo(const MeasurementModel& model, const GainSpec& gain,
                          const GaussianPrior& prior, int n_samples,
                          std::uint64_t seed) {
  require_positive_lambda(prior);
  if (n_samples < 2) {
    throw ValidationError(
        "msd_monte_carlo needs n_samples >= 2 to estimate its standard "
        "error; use msd_sample_mean for single-point evaluation");
  }
  const DeviationEvaluator eval(model, gain);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0,
                                        std::sqrt(0.5 / prior.lambda));

  MsdResult res;
  res.method = "monte-carlo";
  res.prior = prior;
  res.gain = gain;
  // Welford updates: the integrand is nearly constant for well-matched
  // gains, and the textbook sum-of-squares formula cancels to zero there.
  double mean_x = 0.0, m2_x = 0.0, mean_p = 0.0, m2_p = 0.0, err = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double re = dist(rng);
    const double im = dist(rng);
    const SampleValue val = eval(Complex(re, im));
    const double count = static_cast<double>(i + 1);
    const double dx = val.fx - mean_x;
    mean_x += dx / count;
    m2_x += dx * (val.fx - mean_x);
    const double dp = val.fp - mean_p;
    mean_p += dp / count;
    m2_p += dp * (val.fp - mean_p);
    err += std::max(val.err_x, val.err_p);
  }
  const double n = static_cast<double>(n_samples);
  res.v_m_x = mean_x;
  res.v_n_p = mean_p;
  res.stat_error =
      std::sqrt(std::max(m2_x, m2_p) / (n * (n - 1.0)));
  res.trunc_error = err / n;
  return res;
}

MsdResult msd_choi(const MeasurementModel& model, const GainSpec& gain,
                   const GaussianPrior& prior) {
  require_positive_lambda(prior);
  const KrausChannel& ch = model.channel;
  if (ch.in.modes != 1) {
    throw DimensionError(
        "the correlation route needs a single-mode channel input");
  }
  if (model.m.space != ch.out || model.n.space != ch.out) {
    throw DimensionError("observables must act on the channel output space");
  }
  if (!is_hermitian(model.m, 1e-8) || !is_hermitian(model.n, 1e-8)) {
    throw ValidationError("measurement observables must be Hermitian");
  }
  const int d = ch.in.cutoff;
  PreparedVector psi =
      two_mode_squeezed_vector(prior.lambda, FockSpace(d, 2), 1e-3);
  Vector schmidt(d);
  for (int n = 0; n < d; ++n) {
    schmidt(n) = psi.amps(static_cast<Eigen::Index>(n) * d + n);
  }
  auto [xb, pb] = quadratures(ch.in);
  const Matrix xb_t = xb.mat.transpose();
  const Matrix pb_t = pb.mat.transpose();
  const Matrix xb2_t = (xb.mat * xb.mat).transpose();
  const Matrix pb2_t = (pb.mat * pb.mat).transpose();

  const double tx = gain.tau_x(prior.lambda);
  const double tp = gain.tau_p(prior.lambda);
  const double cx = -std::sqrt(tx);  // minus x_B pairs with M
  const double cp = +std::sqrt(tp);  // plus p_B pairs with N

  double acc_x = 0.0, acc_p = 0.0, mass = 0.0;
  if (ch.factored()) {
    // Each Kraus factor is |prep_k><meas_k|, so the correlated rectangle
    // T_k = K_k Psi is rank one and every trace reduces to scalars:
    // tr[T^dag A T B^t] = <prep|A|prep> <s|B|s> with s_b = psi_b meas_k(b)*.
    for (Eigen::Index k = 0; k < ch.n_kraus(); ++k) {
      const auto p = ch.prepared.col(k);
      const Vector mp = model.m.mat * p;
      const Vector np = model.n.mat * p;
      const double m1 = p.dot(mp).real();
      const double m2 = mp.squaredNorm();
      const double n1 = p.dot(np).real();
      const double n2 = np.squaredNorm();
      const Vector s =
          schmidt.asDiagonal() * ch.measured.col(k).conjugate();
      const double ss = s.squaredNorm();
      const Vector xs = xb.mat * s;
      const Vector ps = pb.mat * s;
      acc_x += m2 * ss + 2.0 * cx * m1 * s.dot(xs).real() +
               tx * xs.squaredNorm();
      acc_p += n2 * ss + 2.0 * cp * n1 * s.dot(ps).real() +
               tp * ps.squaredNorm();
      mass += ss;
    }
  } else {
    // Accumulate tr[(A + c B_ref)^2 T T^dag] terms Kraus-by-Kraus, using
    // tr[T^dag A T B^t] = <T, A T B^t>_F on the out x ref rectangles.
    for (const Matrix& kr : ch.kraus) {
      const Matrix t = kr * schmidt.asDiagonal();
      const Matrix tc = t.conjugate();
      const Matrix mt = model.m.mat * t;
      const Matrix nt = model.n.mat * t;
      const double cross_x = tc.cwiseProduct(mt * xb_t).sum().real();
      const double cross_p = tc.cwiseProduct(nt * pb_t).sum().real();
      const double ref_x = tc.cwiseProduct(t * xb2_t).sum().real();
      const double ref_p = tc.cwiseProduct(t * pb2_t).sum().real();
      acc_x += mt.squaredNorm() + 2.0 * cx * cross_x + tx * ref_x;
      acc_p += nt.squaredNorm() + 2.0 * cp * cross_p + tp * ref_p;
      mass += t.squaredNorm();
    }
  }

  MsdResult res;
  res.method = "choi";
  res.prior = prior;
  res.gain = gain;
  res.v_m_x = acc_x / mass + tx / 2.0;
  res.v_n_p = acc_p / mass + tp / 2.0;
  res.trunc_error = psi.tail_mass + std::abs(mass - 1.0);
  return res;
}

}  // namespace qmsd
