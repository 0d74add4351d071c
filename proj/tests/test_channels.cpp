#include "doctest.h"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "qmsd/channels.hpp"

using namespace qmsd;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// <w|rho|w> against a renormalized coherent target.
double coherent_fidelity(const Operator& rho, Complex target) {
  Vector w = coherent_vector(target, rho.space).amps;
  return (w.adjoint() * rho.mat * w).value().real();
}

double mean_of(const Operator& obs, const Operator& rho) {
  return expectation(obs, rho).real();
}

}  // namespace

TEST_CASE("identity channel") {
  FockSpace space(12, 1);
  KrausChannel id = identity_channel(space);
  CHECK(id.completeness_deviation() < 1e-14);
  PreparedState st = coherent_state({Complex(0.7, -0.1)}, space);
  Operator out = id.apply(st.rho);
  CHECK(max_abs(out.mat - st.rho.mat) < 1e-14);
}

TEST_CASE("loss channel validation") {
  FockSpace space(10, 1);
  CHECK_THROWS_AS(loss_channel(0.0, space), ValidationError);
  CHECK_THROWS_AS(loss_channel(1.2, space), ValidationError);
  CHECK_THROWS_AS(loss_channel(0.5, FockSpace(10, 2)), DimensionError);

  // Unit transmittance is the identity.
  KrausChannel full = loss_channel(1.0, space);
  PreparedState st = coherent_state({Complex(0.4, 0.4)}, space);
  CHECK(max_abs(full.apply(st.rho).mat - st.rho.mat) < 1e-14);
}

TEST_CASE("loss channel maps coherent states covariantly") {
  FockSpace space(30, 1);
  const double eta = 0.5;
  KrausChannel loss = loss_channel(eta, space);
  CHECK(loss.completeness_deviation() < 1e-12);

  const Complex alpha(1.0, 0.0);
  PreparedState st = coherent_state({alpha}, space);
  Operator out = loss.apply(st.rho);
  CHECK(std::abs(out.mat.trace() - Complex(1.0)) < 1e-10);
  CHECK(coherent_fidelity(out, std::sqrt(eta) * alpha) > 1.0 - 1e-6);
}

TEST_CASE("loss channel gain covariance on a grid of amplitudes") {
  FockSpace space(40, 1);
  const double eta = 0.36;
  KrausChannel loss = loss_channel(eta, space);
  auto [x, p] = quadratures(space);
  for (Complex alpha : {Complex(0.5, 0.0), Complex(1.0, 0.5),
                        Complex(0.0, 2.0), Complex(-1.3, 0.7)}) {
    PreparedState st = coherent_state({alpha}, space);
    Operator out = loss.apply(st.rho);
    CHECK(std::abs(mean_of(x, out) -
                   std::sqrt(eta) * CoherentAmplitude{alpha}.x()) < 1e-4);
    CHECK(std::abs(mean_of(p, out) -
                   std::sqrt(eta) * CoherentAmplitude{alpha}.p()) < 1e-4);
  }
}

TEST_CASE("amplifier channel") {
  CHECK_THROWS_AS(amplifier_channel(0.9, FockSpace(10, 1)), ValidationError);

  const double gain = 1.5;
  KrausChannel amp = amplifier_channel(gain, FockSpace(12, 1), 60);
  CHECK(amp.out.cutoff == 60);
  CHECK(amp.completeness_deviation() < 1e-6);

  // Quantum-limited amplification of vacuum: x variance (2G - 1)/2.
  PreparedState vac = coherent_state({Complex(0.0)}, FockSpace(12, 1));
  Operator out = amp.apply(vac.rho);
  CHECK(std::abs(out.mat.trace() - Complex(1.0)) < 1e-6);
  auto [x, p] = quadratures(amp.out);
  Operator x2(amp.out, (x.mat * x.mat).eval());
  const double var = mean_of(x2, out) - std::pow(mean_of(x, out), 2);
  CHECK(var == doctest::Approx((2.0 * gain - 1.0) / 2.0).epsilon(1e-4));
}

TEST_CASE("amplifier gain covariance") {
  FockSpace in(30, 1);
  const double gain = 1.5;
  KrausChannel amp = amplifier_channel(gain, in);
  CHECK(amp.out.cutoff == 60);
  const Complex alpha(1.0, 0.5);
  PreparedState st = coherent_state({alpha}, in);
  Operator out = amp.apply(st.rho);
  auto [x, p] = quadratures(amp.out);
  CHECK(std::abs(mean_of(x, out) -
                 std::sqrt(gain) * CoherentAmplitude{alpha}.x()) < 1e-4);
  CHECK(std::abs(mean_of(p, out) -
                 std::sqrt(gain) * CoherentAmplitude{alpha}.p()) < 1e-4);
}

TEST_CASE("heterodyne measure-and-prepare channel") {
  FockSpace space(30, 1);
  KrausChannel het = heterodyne_mp_channel(1.0, space, space);
  CHECK(het.factored());
  CHECK(het.n_kraus() == 81 * 81);
  CHECK(het.completeness_deviation() < 1e-6);

  const Complex alpha(0.5, 0.0);
  PreparedState st = coherent_state({alpha}, space);
  Operator out = het.apply(st.rho);
  CHECK(std::abs(out.mat.trace() - Complex(1.0)) < 1e-6);

  auto [x, p] = quadratures(space);
  Operator x2(space, (x.mat * x.mat).eval());
  const double mean_x = mean_of(x, out);
  CHECK(std::abs(mean_x - CoherentAmplitude{alpha}.x()) < 1e-3);
  // One unit of measurement shot noise plus a half unit from re-preparation.
  CHECK(mean_of(x2, out) - mean_x * mean_x ==
        doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("heterodyne with amplification gain") {
  FockSpace space(30, 1);
  const double g = std::numbers::sqrt2;
  KrausChannel het = heterodyne_mp_channel(g, space, space);
  const Complex alpha(0.3, 0.4);
  Operator out = het.apply(coherent_state({alpha}, space).rho);
  auto [x, p] = quadratures(space);
  CHECK(std::abs(mean_of(x, out) - g * CoherentAmplitude{alpha}.x()) < 1e-3);
  CHECK(std::abs(mean_of(p, out) - g * CoherentAmplitude{alpha}.p()) < 1e-3);
}

TEST_CASE("conjugate heterodyne flips the momentum mean") {
  FockSpace space(30, 1);
  KrausChannel het = heterodyne_conjugate_mp_channel(1.0, space, space);
  const Complex alpha(0.3, 0.4);
  Operator out = het.apply(coherent_state({alpha}, space).rho);
  auto [x, p] = quadratures(space);
  CHECK(std::abs(mean_of(x, out) - CoherentAmplitude{alpha}.x()) < 1e-3);
  CHECK(std::abs(mean_of(p, out) + CoherentAmplitude{alpha}.p()) < 1e-3);
}

TEST_CASE("half beam-splitter channel") {
  FockSpace in(30, 1);
  KrausChannel half = half_bs_channel(in);
  CHECK(half.out.modes == 2);
  CHECK(half.completeness_deviation(in.cutoff - 1) < 1e-12);

  const Complex alpha(1.0, 0.0);
  Operator out = half.apply(coherent_state({alpha}, in).rho);
  CHECK(std::abs(out.mat.trace() - Complex(1.0)) < 1e-10);

  // rho_alpha -> rho_{alpha/sqrt 2} (x) rho_{alpha/sqrt 2}.
  Vector w = coherent_vector(alpha / std::numbers::sqrt2, in).amps;
  Vector target(half.out.dim());
  for (int i = 0; i < in.cutoff; ++i) {
    target.segment(static_cast<Eigen::Index>(i) * in.cutoff, in.cutoff) =
        w(i) * w;
  }
  const double fid = (target.adjoint() * out.mat * target).value().real();
  CHECK(fid > 1.0 - 1e-6);
}

TEST_CASE("apply rejects mismatched spaces") {
  KrausChannel loss = loss_channel(0.5, FockSpace(10, 1));
  PreparedState st = coherent_state({Complex(0.2, 0.0)}, FockSpace(12, 1));
  CHECK_THROWS_AS(loss.apply(st.rho), DimensionError);
}

TEST_CASE("choi state of the identity channel is the squeezed vacuum") {
  FockSpace space(40, 1);
  ChoiState choi = choi_state(identity_channel(space), 1.0);
  CHECK(std::abs(choi.j.trace() - Complex(1.0)) < 1e-12);
  CHECK(choi.trace_deviation < 1e-12);
  CHECK(choi.tail_mass == doctest::Approx(std::pow(0.5, 40)).epsilon(1e-10));

  // Pure state: tr(J^2) = 1.
  CHECK(choi.j.squaredNorm() > 1.0 - 1e-6);
  Vector psi = two_mode_squeezed_vector(1.0, FockSpace(40, 2)).amps;
  CHECK(max_abs(choi.j - psi * psi.adjoint()) < 1e-12);
}

TEST_CASE("choi state marginals") {
  FockSpace space(25, 1);
  KrausChannel loss = loss_channel(0.7, space);
  ChoiState choi = choi_state(loss, 1.0);

  Operator joint(FockSpace(25, 2), choi.j);
  // Trace over the channel output: the reference keeps the thermal marginal
  // of the squeezed vacuum, untouched by any trace-preserving channel.
  Operator ref = partial_trace(joint, std::array<int, 1>{1});
  PreparedState therm = thermal_state(1.0, space);
  CHECK(max_abs(ref.mat - therm.rho.mat) < 1e-7);

  // Trace over the reference: the output marginal is E(thermal).
  Operator out = partial_trace(joint, std::array<int, 1>{0});
  Operator direct = loss.apply(therm.rho);
  CHECK(max_abs(out.mat - direct.mat) < 1e-7);
}

TEST_CASE("choi state concentrates at vacuum for a sharp prior") {
  FockSpace space(10, 1);
  ChoiState choi = choi_state(loss_channel(0.5, space), 1e6);
  Matrix target = Matrix::Zero(100, 100);
  target(0, 0) = 1.0;
  // Residual coherences scale with the amplitude sqrt(1/lambda) = 1e-3.
  CHECK(std::abs(choi.j(0, 0) - Complex(1.0)) < 2e-6);
  CHECK(max_abs(choi.j - target) < 1e-3);
}

TEST_CASE("choi state refuses unmanageable dimensions") {
  KrausChannel half = half_bs_channel(FockSpace(40, 1));
  CHECK_THROWS_AS(choi_state(half, 1.0), DimensionError);
}
