#include "qmsd/channels.hpp"

#include <cmath>

namespace qmsd {

namespace {

constexpr double kCompletenessTol = 1e-6;

int low_block_total(const FockSpace& space) {
  return std::min(10, space.cutoff - 1);
}

void validate_named_channel(const KrausChannel& ch) {
  const double dev = ch.completeness_deviation(low_block_total(ch.in));
  if (dev > kCompletenessTol) {
    throw TruncationError(
        ch.label + ": completeness deviation " + std::to_string(dev) +
        " on the low-photon block exceeds " +
        std::to_string(kCompletenessTol) +
        " (increase the output cutoff or refine the grid)");
  }
}

}  // namespace

Operator KrausChannel::apply(const Operator& rho) const {
  if (rho.space != in) {
    throw DimensionError("channel '" + label +
                         "' applied to a state on the wrong space");
  }
  if (factored()) {
    RealVector q(measured.cols());
    for (Eigen::Index k = 0; k < measured.cols(); ++k) {
      q(k) = (measured.col(k).adjoint() * rho.mat * measured.col(k))
                 .value()
                 .real();
    }
    Matrix out_mat = prepared * q.asDiagonal() * prepared.adjoint();
    return Operator(out, std::move(out_mat));
  }
  Matrix out_mat = Matrix::Zero(out.dim(), out.dim());
  for (const Matrix& k : kraus) {
    out_mat.noalias() += k * rho.mat * k.adjoint();
  }
  return Operator(out, std::move(out_mat));
}

Matrix KrausChannel::completeness() const {
  if (factored()) {
    return measured * measured.adjoint();
  }
  Matrix sum = Matrix::Zero(in.dim(), in.dim());
  for (const Matrix& k : kraus) {
    sum.noalias() += k.adjoint() * k;
  }
  return sum;
}

double KrausChannel::completeness_deviation(int max_total) const {
  return block_deviation_from_identity(completeness(), in, max_total);
}

KrausChannel identity_channel(const FockSpace& space) {
  KrausChannel ch;
  ch.in = space;
  ch.out = space;
  ch.label = "identity";
  ch.kraus.push_back(Matrix::Identity(space.dim(), space.dim()));
  return ch;
}

KrausChannel loss_channel(double eta, const FockSpace& in) {
  if (in.modes != 1) {
    throw DimensionError("loss_channel expects a single-mode space");
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ValidationError("loss transmittance must lie in (0, 1]");
  }
  const int d = in.cutoff;
  KrausChannel ch;
  ch.in = in;
  ch.out = in;
  ch.label = "loss(" + std::to_string(eta) + ")";
  if (eta == 1.0) {
    ch.kraus.push_back(Matrix::Identity(d, d));
    return ch;
  }
  // K_k |n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k>.
  for (int k = 0; k < d; ++k) {
    Matrix kr = Matrix::Zero(d, d);
    for (int n = k; n < d; ++n) {
      const double log_amp2 = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                              std::lgamma(n - k + 1.0) +
                              (n - k) * std::log(eta) +
                              k * std::log1p(-eta);
      kr(n - k, n) = std::exp(0.5 * log_amp2);
    }
    ch.kraus.push_back(std::move(kr));
  }
  validate_named_channel(ch);
  return ch;
}

KrausChannel amplifier_channel(double gain, const FockSpace& in,
                               std::optional<int> out_cutoff) {
  if (in.modes != 1) {
    throw DimensionError("amplifier_channel expects a single-mode space");
  }
  if (!(gain >= 1.0)) {
    throw ValidationError("amplifier gain must be >= 1");
  }
  const int d_in = in.cutoff;
  const int d_out = out_cutoff.value_or(2 * d_in);
  if (d_out < d_in) {
    throw DimensionError("amplifier output cutoff below the input cutoff");
  }
  KrausChannel ch;
  ch.in = in;
  ch.out = FockSpace(d_out, 1);
  ch.label = "amplifier(" + std::to_string(gain) + ")";
  const double t = std::sqrt(1.0 - 1.0 / gain);  // tanh of the squeeze
  const double log_c = -0.5 * std::log(gain);    // log sech
  // K_k = t^k / sqrt(k!) a^dag^k sech^(n+1); adds k photons.
  for (int k = 0; k < d_out; ++k) {
    Matrix kr = Matrix::Zero(d_out, d_in);
    for (int n = 0; n + k < d_out && n < d_in; ++n) {
      if (k > 0 && t == 0.0) continue;
      const double log_amp =
          (k > 0 ? k * std::log(t) : 0.0) +
          0.5 * (std::lgamma(n + k + 1.0) - std::lgamma(n + 1.0) -
                 std::lgamma(k + 1.0)) +
          (n + 1) * log_c;
      kr(n + k, n) = std::exp(log_amp);
    }
    if (kr.cwiseAbs().maxCoeff() == 0.0) continue;
    ch.kraus.push_back(std::move(kr));
  }
  validate_named_channel(ch);
  return ch;
}

namespace {

KrausChannel heterodyne_impl(double gain, const FockSpace& in,
                             const FockSpace& out,
                             const HeterodyneOptions& opts, bool conjugate) {
  if (in.modes != 1 || out.modes != 1) {
    throw DimensionError("heterodyne channels expect single-mode spaces");
  }
  if (!(gain > 0.0)) {
    throw ValidationError("heterodyne re-preparation gain must be > 0");
  }
  if (!(opts.grid_step > 0.0) || !(opts.grid_radius > 0.0)) {
    throw ValidationError("heterodyne grid step and radius must be > 0");
  }
  const int per_axis =
      static_cast<int>(std::lround(2.0 * opts.grid_radius / opts.grid_step)) +
      1;
  const Eigen::Index n_points =
      static_cast<Eigen::Index>(per_axis) * per_axis;
  const double w = opts.grid_step * opts.grid_step / std::numbers::pi;
  const double sqrt_w = std::sqrt(w);

  KrausChannel ch;
  ch.in = in;
  ch.out = out;
  ch.label = std::string(conjugate ? "heterodyne-conjugate-mp(" :
                                     "heterodyne-mp(") +
             std::to_string(gain) + ")";
  ch.prepared.resize(out.dim(), n_points);
  ch.measured.resize(in.dim(), n_points);
  Eigen::Index col = 0;
  for (int i = 0; i < per_axis; ++i) {
    const double re = -opts.grid_radius + i * opts.grid_step;
    for (int j = 0; j < per_axis; ++j) {
      const double im = -opts.grid_radius + j * opts.grid_step;
      const Complex beta(re, im);
      ch.measured.col(col) = sqrt_w * coherent_vector_raw(beta, in.cutoff);
      const Complex prep_amp = gain * (conjugate ? std::conj(beta) : beta);
      // Grid corners can lie far past the output cutoff; they carry nearly
      // zero weight, so the re-prepared state is renormalized regardless.
      ch.prepared.col(col) = coherent_vector(prep_amp, out, 1.0).amps;
      ++col;
    }
  }
  validate_named_channel(ch);
  return ch;
}

}  // namespace

KrausChannel heterodyne_mp_channel(double gain, const FockSpace& in,
                                   const FockSpace& out,
                                   const HeterodyneOptions& opts) {
  return heterodyne_impl(gain, in, out, opts, false);
}

KrausChannel heterodyne_conjugate_mp_channel(double gain, const FockSpace& in,
                                             const FockSpace& out,
                                             const HeterodyneOptions& opts) {
  return heterodyne_impl(gain, in, out, opts, true);
}

KrausChannel half_bs_channel(const FockSpace& in) {
  if (in.modes != 1) {
    throw DimensionError("half_bs_channel expects a single-mode input");
  }
  const int d = in.cutoff;
  FockSpace joint(d, 2);
  Operator u = beam_splitter(0.5, joint);
  KrausChannel ch;
  ch.in = in;
  ch.out = joint;
  ch.label = "half-bs";
  // Isometry V|n> = U |n, 0>: the ancilla enters in vacuum.
  Matrix v(joint.dim(), d);
  for (int n = 0; n < d; ++n) {
    v.col(n) = u.mat.col(static_cast<Eigen::Index>(n) * d);
  }
  ch.kraus.push_back(std::move(v));
  return ch;
}

ChoiState choi_state(const KrausChannel& channel, double lambda) {
  if (channel.in.modes != 1) {
    throw DimensionError(
        "choi_state requires a single-mode channel input to pair with the "
        "reference mode");
  }
  const Eigen::Index d_ref = channel.in.dim();
  const Eigen::Index d_out = channel.out.dim();
  const Eigen::Index joint = d_out * d_ref;
  if (joint > 4096) {
    throw DimensionError(
        "choi_state would materialize a " + std::to_string(joint) + "x" +
        std::to_string(joint) +
        " matrix; use the streaming correlation route instead");
  }
  PreparedVector psi =
      two_mode_squeezed_vector(lambda, FockSpace(channel.in.cutoff, 2), 1e-3);
  Vector schmidt(d_ref);
  for (Eigen::Index n = 0; n < d_ref; ++n) {
    schmidt(n) = psi.amps(n * d_ref + n);
  }

  Matrix j = Matrix::Zero(joint, joint);
  auto accumulate = [&](const Matrix& t) {
    Vector v(joint);
    for (Eigen::Index i = 0; i < d_out; ++i) {
      v.segment(i * d_ref, d_ref) = t.row(i).transpose();
    }
    j.noalias() += v * v.adjoint();
  };
  if (channel.factored()) {
    for (Eigen::Index k = 0; k < channel.n_kraus(); ++k) {
      const Matrix row =
          channel.measured.col(k).adjoint() * schmidt.asDiagonal();
      accumulate(channel.prepared.col(k) * row);
    }
  } else {
    for (const Matrix& kr : channel.kraus) {
      accumulate(kr * schmidt.asDiagonal());
    }
  }
  ChoiState result;
  result.out_space = channel.out;
  result.ref_space = channel.in;
  result.lambda = lambda;
  result.tail_mass = psi.tail_mass;
  const double tr = j.trace().real();
  result.trace_deviation = std::abs(tr - 1.0);
  result.j = j / tr;
  return result;
}

}  // namespace qmsd
