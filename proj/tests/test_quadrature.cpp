#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qmsd/quadrature.hpp"

using namespace qmsd;

namespace {

double integrate(const GaussHermiteRule& rule, auto&& f) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights(i) * f(rule.nodes(i));
  }
  return sum;
}

}  // namespace

TEST_CASE("gauss_hermite rejects tiny orders") {
  CHECK_THROWS_AS(gauss_hermite(7), ValidationError);
  CHECK_THROWS_AS(gauss_hermite(0), ValidationError);
  CHECK_THROWS_AS(gauss_hermite(-3), ValidationError);
  CHECK_NOTHROW(gauss_hermite(8));
}

TEST_CASE("gauss_hermite weights sum to sqrt(pi)") {
  const double root_pi = std::sqrt(std::numbers::pi);
  for (int order : {8, 20, 40}) {
    GaussHermiteRule rule = gauss_hermite(order);
    REQUIRE(rule.nodes.size() == order);
    REQUIRE(rule.weights.size() == order);
    CHECK(std::abs(rule.weights.sum() - root_pi) < 1e-13);
  }
}

TEST_CASE("gauss_hermite nodes are symmetric and sorted") {
  GaussHermiteRule rule = gauss_hermite(20);
  for (int i = 0; i + 1 < 20; ++i) {
    CHECK(rule.nodes(i) < rule.nodes(i + 1));
  }
  for (int i = 0; i < 20; ++i) {
    CHECK(std::abs(rule.nodes(i) + rule.nodes(19 - i)) < 1e-12);
    CHECK(std::abs(rule.weights(i) - rule.weights(19 - i)) < 1e-13);
  }
}

TEST_CASE("gauss_hermite integrates monomials exactly") {
  const double root_pi = std::sqrt(std::numbers::pi);
  GaussHermiteRule rule = gauss_hermite(8);

  // Moments of exp(-t^2): odd vanish, even are (2k-1)!!/2^k * sqrt(pi).
  CHECK(std::abs(integrate(rule, [](double t) { return t; })) < 1e-14);
  CHECK(integrate(rule, [](double t) { return t * t; }) ==
        doctest::Approx(0.5 * root_pi).epsilon(1e-13));
  CHECK(integrate(rule, [](double t) { return std::pow(t, 4); }) ==
        doctest::Approx(0.75 * root_pi).epsilon(1e-13));
  CHECK(integrate(rule, [](double t) { return std::pow(t, 8); }) ==
        doctest::Approx(105.0 / 16.0 * root_pi).epsilon(1e-13));

  // Degree 15 is still within the exactness guarantee of an 8-point rule;
  // the residual is pure rounding from large cancelling terms.
  CHECK(std::abs(integrate(rule, [](double t) { return std::pow(t, 15); })) <
        1e-9);
}

TEST_CASE("gauss_hermite converges on a gaussian integrand") {
  // Integral of exp(-t^2) * cos(t) dt = sqrt(pi) * exp(-1/4).
  const double exact = std::sqrt(std::numbers::pi) * std::exp(-0.25);
  GaussHermiteRule rule = gauss_hermite(20);
  CHECK(integrate(rule, [](double t) { return std::cos(t); }) ==
        doctest::Approx(exact).epsilon(1e-12));
}
