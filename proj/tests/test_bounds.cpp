#include "doctest.h"

#include <cmath>
#include <complex>

#include "qmsd/bounds.hpp"

using namespace qmsd;

namespace {

MeasurementModel quadrature_readout(KrausChannel ch) {
  auto [x, p] = quadratures(ch.out);
  return {std::move(ch), x, p};
}

// Balanced-splitter joint measurement tuned to saturate the skewed
// trade-off at (eta, s, lambda).
MeasurementModel split_readout(int cutoff, double eta, double s,
                               double lambda) {
  KrausChannel ch = half_bs_channel(FockSpace(cutoff, 1));
  Operator x = quadratures(ch.out, 0).x;
  Operator p = quadratures(ch.out, 1).p;
  x.mat *= std::sqrt(2.0 * eta * s) / (1.0 + lambda);
  p.mat *= std::sqrt(2.0 * eta / s) / (1.0 + lambda);
  return {std::move(ch), std::move(x), std::move(p)};
}

// The deviation pair of the saturating splitter construction, as a plain
// result record (no numerics involved).
MsdResult saturating_pair(double eta, double s, double lambda) {
  MsdResult res;
  res.v_m_x = eta * s / (1.0 + lambda);
  res.v_n_p = eta / (s * (1.0 + lambda));
  res.method = "closed-form";
  res.prior = GaussianPrior(lambda);
  res.gain = GainSpec::from_gs(eta, s);
  return res;
}

}  // namespace

TEST_CASE("closed-form bound values") {
  CHECK(bound_channel(1.0, 0.0, BranchSign::upper) == 0.25);
  CHECK(bound_channel(0.0, 0.7, BranchSign::upper) == 0.25);
  CHECK(bound_channel(0.0, 0.7, BranchSign::lower) == 0.25);
  CHECK(bound_channel(1.0, 1.0, BranchSign::upper) == 0.25);
  CHECK(bound_channel(3.0, 0.0, BranchSign::upper) == doctest::Approx(6.25));
  CHECK(bound_channel(3.0, 0.0, BranchSign::lower) == doctest::Approx(12.25));

  CHECK(bound_eb(1.0, 0.0) == 2.25);
  CHECK(bound_eb(0.0, 3.0) == 0.25);
  CHECK(bound_eb(1.0, 1.0) == 1.0);

  CHECK(bound_joint(1.0, 0.0) == 1.0);
  CHECK(bound_joint(0.0, 1.0) == 0.0);
  CHECK(bound_joint(2.0, 1.0) == 1.0);

  CHECK_THROWS_AS(bound_channel(-1.0, 0.0, BranchSign::upper),
                  ValidationError);
  CHECK_THROWS_AS(bound_eb(1.0, -0.1), ValidationError);
}

TEST_CASE("hierarchy holds exactly where the reduced gain reaches one half") {
  // b3 < b2 everywhere. b1 <= b3 if and only if G/(1+lambda) >= 1/2: below
  // that the channel bound's quarter floor exceeds the joint bound, so no
  // global ordering of the three families exists.
  for (int i = 1; i <= 50; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double big_g = 0.08 * i;
      const double lambda = 0.1 * j;
      const double g = big_g / (1.0 + lambda);
      const double b1 = bound_channel(big_g, lambda, BranchSign::upper);
      const double b3 = bound_joint(big_g, lambda);
      const double b2 = bound_eb(big_g, lambda);
      REQUIRE(b3 < b2);
      if (g >= 0.5) {
        REQUIRE(b1 <= b3);
      } else {
        REQUIRE(b1 > b3);
      }
      // The phase-conjugate branch coincides with the measure-and-prepare
      // bound.
      REQUIRE(bound_channel(big_g, lambda, BranchSign::lower) ==
              doctest::Approx(b2).epsilon(1e-12));
    }
  }
}

TEST_CASE("bounds are monotone in gain and prior precision") {
  const auto values = [](double big_g, double lambda) {
    return std::array<double, 3>{
        bound_channel(big_g, lambda, BranchSign::upper),
        bound_joint(big_g, lambda), bound_eb(big_g, lambda)};
  };
  for (double big_g : {0.2, 0.6, 1.0, 2.5}) {
    for (double lambda : {0.0, 0.4, 1.0, 3.0}) {
      const auto base = values(big_g, lambda);
      const auto more_gain = values(big_g + 0.3, lambda);
      const auto more_lambda = values(big_g, lambda + 0.3);
      for (int k = 0; k < 3; ++k) {
        REQUIRE(more_gain[k] >= base[k]);
        REQUIRE(more_lambda[k] <= base[k]);
      }
    }
  }
}

TEST_CASE("report semantics") {
  BoundReport even = make_report(1.0, 1.0);
  CHECK(even.saturated);
  CHECK_FALSE(even.violated);
  CHECK(even.slack == 0.0);

  BoundReport above = make_report(2.0, 1.0);
  CHECK_FALSE(above.saturated);
  CHECK_FALSE(above.violated);

  BoundReport below = make_report(1.0 - 5e-6, 1.0);
  CHECK(below.violated);
  CHECK_FALSE(below.saturated);  // violation wins over the saturation band

  BoundReport budgeted = make_report(1.0 - 5e-6, 1.0, 1e-5);
  CHECK_FALSE(budgeted.violated);
  CHECK(budgeted.saturated);

  BoundReport tiny = make_report(1.0 - 5e-7, 1.0);
  CHECK_FALSE(tiny.violated);
  CHECK(tiny.saturated);
}

TEST_CASE("offset-product relation on the identity channel") {
  MeasurementModel model = quadrature_readout(
      identity_channel(FockSpace(30, 1)));
  GainSpec unit = GainSpec::isotropic(1.0);
  GaussianPrior prior(1.0);
  MsdResult msd = msd_quadrature(model, unit, prior);

  Complex comm = commutator_expectation(model, 1.0);
  CHECK(std::abs(comm.real()) < 1e-10);
  CHECK(comm.imag() == doctest::Approx(1.0).epsilon(1e-6));

  BoundReport rep = lemma_check(msd, comm);
  CHECK(rep.lhs == doctest::Approx(1.0 / 16.0).epsilon(1e-5));
  CHECK(rep.rhs == doctest::Approx(1.0 / 16.0).epsilon(1e-5));
  CHECK(rep.saturated);
  CHECK_FALSE(rep.violated);
  CHECK_FALSE(rep.offset_negative);
}

TEST_CASE("offset-product relation on a commuting readout pair") {
  // [M, N] = 0 exactly for readouts on different splitter arms, so the
  // right side reduces to the joint-measurement constant; the tuned
  // construction saturates it.
  const double eta = 1.0, s = 1.0, lambda = 1.0;
  MeasurementModel model = split_readout(25, eta, s, lambda);
  MsdResult msd = msd_quadrature(model, GainSpec::from_gs(eta, s),
                                 GaussianPrior(lambda));
  Complex comm = commutator_expectation(model, lambda);
  CHECK(std::abs(comm) < 1e-10);

  BoundReport rep = lemma_check(msd, comm);
  CHECK(rep.rhs == doctest::Approx(1.0 / 16.0).epsilon(1e-9));
  CHECK(rep.saturated);
  CHECK_FALSE(rep.violated);
}

TEST_CASE("offset-product relation with zero readouts is strict") {
  FockSpace space(30, 1);
  KrausChannel ch = loss_channel(0.5, space);
  Operator zero(ch.out, Matrix::Zero(ch.out.dim(), ch.out.dim()));
  MeasurementModel model{std::move(ch), zero, zero};
  MsdResult msd = msd_quadrature(model, GainSpec::isotropic(1.0),
                                 GaussianPrior(1.0));
  BoundReport rep = lemma_check(msd, Complex(0.0));
  CHECK(rep.lhs == doctest::Approx(9.0 / 16.0).epsilon(1e-5));
  CHECK(rep.rhs == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK_FALSE(rep.saturated);
  CHECK_FALSE(rep.violated);
}

TEST_CASE("skewed trade-off saturation, numeric and closed form") {
  const double eta = 1.0, s = 2.0, lambda = 1.0;
  MeasurementModel model = split_readout(30, eta, s, lambda);
  MsdResult msd = msd_quadrature(model, GainSpec::from_gs(eta, s),
                                 GaussianPrior(lambda));
  BoundReport rep = sur2_check(msd, eta, s, lambda);
  CHECK(rep.rhs == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK(rep.saturated);
  CHECK_FALSE(rep.violated);
  CHECK_FALSE(rep.offset_negative);

  CHECK_THROWS_AS(sur2_check(msd, 1.0, 1.0, lambda), ValidationError);

  for (double eta_c : {0.5, 1.0}) {
    for (double s_c : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      for (double lambda_c : {0.0, 1.0}) {
        BoundReport sweep =
            sur2_check(saturating_pair(eta_c, s_c, lambda_c), eta_c, s_c,
                       lambda_c);
        CHECK(sweep.saturated);
        CHECK_FALSE(sweep.violated);
      }
    }
  }
}

TEST_CASE("weighted-sum bound and its tangent lines") {
  CHECK(mib_bound(1.0, 1.0, 0.5, 0.5) == doctest::Approx(2.0));
  CHECK(mib_bound(3.0, 0.0, 0.5, 0.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(mib_bound(1.0, 1.0, 0.5, 0.4), ValidationError);
  CHECK_THROWS_AS(mib_bound(-1.0, 1.0, 0.5, 0.5), ValidationError);

  // V = (s, 1/s) at eta = 1, lambda = 0, weighted by t = 1/s: equality.
  for (double s : {0.5, 1.0, 2.0}) {
    MsdResult msd = saturating_pair(1.0, s, 0.0);
    BoundReport rep = tangent_check(msd, s, 1.0 / s);
    CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.saturated);
  }

  // Off the tangency weight the sum sits strictly above.
  MsdResult skewed = saturating_pair(1.0, 2.0, 0.0);
  BoundReport off = tangent_check(skewed, 2.0, 1.0);
  CHECK(off.lhs == doctest::Approx(1.25).epsilon(1e-12));
  CHECK_FALSE(off.saturated);
  CHECK_FALSE(off.violated);

  CHECK_THROWS_AS(tangent_check(skewed, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(tangent_check(skewed, 2.0, 0.0), ValidationError);
}

TEST_CASE("bound specifications validate their parameter bags") {
  CHECK_NOTHROW(validate(BoundSpec{"eb-B2", {{"G", 1.0}, {"lambda", 0.5}}}));
  CHECK_NOTHROW(validate(BoundSpec{
      "mib",
      {{"g_x", 1.0}, {"g_p", 2.0}, {"sigma_x2", 0.5}, {"sigma_p2", 0.5}}}));
  CHECK_THROWS_AS(validate(BoundSpec{"nonsense", {}}), ValidationError);
  CHECK_THROWS_AS(validate(BoundSpec{"eb-B2", {{"G", 1.0}}}),
                  ValidationError);
  CHECK_THROWS_AS(
      validate(BoundSpec{"eb-B2", {{"G", -1.0}, {"lambda", 0.0}}}),
      ValidationError);
  CHECK_THROWS_AS(
      validate(BoundSpec{"sur2", {{"eta", 1.0}, {"s", 0.0}, {"lambda", 0.0}}}),
      ValidationError);
}

TEST_CASE("commutator expectation rejects the uniform-prior limit") {
  MeasurementModel model = quadrature_readout(
      identity_channel(FockSpace(10, 1)));
  CHECK_THROWS_AS(commutator_expectation(model, 0.0), ValidationError);
}
