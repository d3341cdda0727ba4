#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "tricut/quadrature.hpp"

TEST_CASE("gauss rules integrate polynomials of degree 2n-1 exactly") {
  const double i15 = tricut::gauss_integrate(
      [](double x) { return std::pow(x, 15); }, 0.0, 1.0, 8);
  CHECK(std::abs(i15 - 1.0 / 16.0) <= 1e-15);
  const double i31 = tricut::gauss_integrate(
      [](double x) { return std::pow(x, 31); }, 0.0, 1.0, 16);
  CHECK(std::abs(i31 - 1.0 / 32.0) <= 1e-14);
}

TEST_CASE("gauss nodes are symmetric and weights sum to the length") {
  const tricut::GaussRule& r = tricut::gauss_rule(32);
  double wsum = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    CHECK(r.x[i] == -r.x[r.x.size() - 1 - i]);
    CHECK(r.x[i] > -1.0);
    CHECK(r.x[i] < 1.0);
    wsum += r.w[i];
  }
  CHECK(std::abs(wsum - 2.0) <= 1e-14);
}

TEST_CASE("adaptive integration reaches the requested tolerance") {
  const double e1 = tricut::integrate([](double x) { return std::exp(x); },
                                      0.0, 1.0, 1e-12);
  CHECK(std::abs(e1 - (std::exp(1.0) - 1.0)) <= 1e-12);

  // many cancelling lobes; budget is scaled by the integral of |f|
  const double s = tricut::integrate([](double x) { return std::sin(x); }, 0.0,
                                     20.0 * 3.14159265358979323846, 1e-10);
  CHECK(std::abs(s) <= 1e-8);
}

TEST_CASE("adaptive integration handles complex integrands") {
  const std::complex<double> v = tricut::integrate(
      [](double x) { return std::exp(std::complex<double>(0.0, x)); }, 0.0,
      1.0, 1e-12);
  CHECK(std::abs(v.real() - std::sin(1.0)) <= 1e-12);
  CHECK(std::abs(v.imag() - (1.0 - std::cos(1.0))) <= 1e-12);
}

TEST_CASE("non-integrable endpoint behaviour raises after the depth limit") {
  CHECK_THROWS_AS(tricut::integrate([](double x) { return 1.0 / x; }, 0.0, 1.0,
                                    1e-10, 20),
                  tricut::QuadratureNonConvergence);
}
