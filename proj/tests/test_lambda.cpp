#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tricut/density.hpp"
#include "tricut/lambda.hpp"

using namespace tricut;

namespace {

const double kPi = std::numbers::pi;

Complex polar_point(double radius, double angle) {
  return radius * std::exp(Complex(0.0, angle));
}

// residual of the four large-z forms, principal log
double expansion_residual(const LambdaEvaluator& ev, int sheet, Complex z) {
  const ModelParams& pr = ev.params();
  const std::array<Complex, 4>& l = ev.l_constants();
  const Complex lg = std::log(z);
  Complex form;
  switch (sheet) {
    case 1: form = z * z / 2.0 - lg + l[0]; break;
    case 2: form = pr.a * z + pr.t1 * lg + l[1]; break;
    case 3: form = pr.t * lg + l[2]; break;
    default: form = -pr.a * z + pr.t1 * lg + l[3]; break;
  }
  return std::abs(ev.lambda(z, sheet) - form);
}

}  // namespace

TEST_CASE("normalization anchors pin all four lambdas") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);
  const SupportData& s = ev.support();

  CHECK(std::abs(ev.lambda(Complex(s.z3, 0.0), 1, Side::above)) <= 1e-9);
  CHECK(std::abs(ev.lambda(Complex(s.z3, 0.0), 2, Side::above)) <= 1e-9);

  // lambda3 continues lambda1+ through z1; the below-side value differs by
  // the jump constant
  const Complex lam3_z1 = ev.lambda(Complex(s.z1, 0.0), 3, Side::above);
  CHECK(std::abs(lam3_z1 - ev.lambda(Complex(s.z1, 0.0), 1, Side::above)) <= 1e-8);
  CHECK(std::abs(ev.lambda(Complex(s.z1, 0.0), 1, Side::below) - lam3_z1 -
                 Complex(0.0, (1.0 - pr.t) * kPi)) <= 1e-8);

  const Complex lam4_mz2 = ev.lambda(Complex(-s.z2, 0.0), 4, Side::above);
  CHECK(std::abs(lam4_mz2 - ev.lambda(Complex(-s.z2, 0.0), 1, Side::above)) <= 1e-8);
  CHECK(std::abs(ev.lambda(Complex(-s.z2, 0.0), 1, Side::below) - lam4_mz2 -
                 Complex(0.0, (1.0 + pr.t) * kPi)) <= 1e-8);
}

TEST_CASE("integration constants are finite and path independent") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);
  const std::array<Complex, 4>& l = ev.l_constants();
  for (const Complex& lj : l) {
    CHECK(std::isfinite(lj.real()));
    CHECK(std::isfinite(lj.imag()));
  }

  // doubled elevation and split panels deform every path; analyticity says
  // nothing may move
  const LambdaEvaluator raised(pr, {.elevation_scale = 2.0});
  const LambdaEvaluator split(pr, {.panel_split = 2});
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(raised.l_constants()[j] - l[j]) < 1e-8);
    CHECK(std::abs(split.l_constants()[j] - l[j]) < 1e-8);
  }
  const Complex probe(0.8, 0.6);
  for (int sheet = 1; sheet <= 4; ++sheet) {
    CHECK(std::abs(raised.lambda(probe, sheet) - ev.lambda(probe, sheet)) < 1e-8);
    CHECK(std::abs(split.lambda(probe, sheet) - ev.lambda(probe, sheet)) < 1e-8);
  }
}

TEST_CASE("large z expansions with the documented constants") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);

  CHECK(expansion_residual(ev, 1, Complex(1e3, 0.0)) <= 1e-4);
  CHECK(expansion_residual(ev, 3, Complex(1e3, 0.0)) <= 1e-4);

  // off the extraction ray; sheets 2 and 4 keep an O(1/z) tail, so their
  // residual at |z| = 1e3 sits near 3e-4 rather than the 1e-4 of 1 and 3
  const Complex far = polar_point(1e3, kPi / 6.0);
  CHECK(expansion_residual(ev, 1, far) <= 1e-4);
  CHECK(expansion_residual(ev, 3, far) <= 1e-4);
  CHECK(expansion_residual(ev, 2, far) <= 1e-3);
  CHECK(expansion_residual(ev, 4, far) <= 1e-3);

  for (int sheet = 1; sheet <= 4; ++sheet) {
    const double near_res = expansion_residual(ev, sheet, polar_point(1e2, kPi / 6.0));
    const double far_res = expansion_residual(ev, sheet, far);
    CHECK(near_res >= 5.0 * far_res);
  }
}

TEST_CASE("all seven jump relations hold on their intervals") {
  for (const auto& [a, t] : {std::pair{2.0, 0.5}, std::pair{2.5, 0.3}}) {
    CAPTURE(a);
    CAPTURE(t);
    const ModelParams pr = ModelParams::three_cut(a, t);
    const LambdaEvaluator ev(pr);
    const SupportData& s = ev.support();

    const JumpReport rep = ev.jump_report(20);
    REQUIRE(rep.relations.size() == 7);
    CHECK(rep.max_residual <= 1e-8);
    for (const JumpResidual& r : rep.relations) {
      CAPTURE(r.relation);
      CHECK(r.samples == 20);
      CHECK(r.max_residual <= 1e-8);
      CHECK(r.lo < r.hi);
    }
    CHECK(rep.relations[0].lo == doctest::Approx(s.z2));
    CHECK(rep.relations[0].hi == doctest::Approx(s.z3));
    CHECK(rep.relations[2].lo == doctest::Approx(s.z1));
    CHECK(rep.relations[2].hi == doctest::Approx(s.z2));
    CHECK(rep.relations[5].lo == doctest::Approx(-s.z3));
    CHECK(rep.relations[5].hi == doctest::Approx(-s.z2));
  }
}

TEST_CASE("real part ordering near the cuts") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);
  const double width = ev.support().z3 - ev.support().z2;

  const int expected_by_interval[4] = {0, 4, 3, 2};
  for (int interval : {1, 2, 3}) {
    for (double off : {1e-2 * width, 1e-3 * width}) {
      const LemmaReport rep = ev.lemma_report(interval, off);
      CHECK(rep.expected_sheet == expected_by_interval[interval]);
      CHECK(rep.samples == 40);
      CHECK(rep.min_margin > 0.0);
      CHECK(rep.violations.empty());
    }
  }

  // margins decay toward the cut, staying positive
  for (int interval : {2, 3}) {
    double prev = 1e300;
    for (double off : {1e-2, 1e-3, 1e-4}) {
      const double margin = ev.lemma_report(interval, off).min_margin;
      CHECK(margin > 0.0);
      CHECK(margin < prev);
      prev = margin;
    }
  }

  CHECK_THROWS_AS((void)ev.lemma_report(0, 1e-3), ConfigError);
  CHECK_THROWS_AS((void)ev.lemma_report(4, 1e-3), ConfigError);
  CHECK_THROWS_AS((void)ev.lemma_report(3, 0.0), ConfigError);
  CHECK_THROWS_AS((void)ev.lemma_report(3, -1e-3), ConfigError);
  CHECK_THROWS_AS((void)ev.lemma_report(3, 0.051 * width), ConfigError);
}

TEST_CASE("derivatives recover the sheet functions") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);

  std::mt19937 rng(20240817u);
  std::uniform_real_distribution<double> re(-4.5, 4.5), im(0.05, 2.0);
  std::bernoulli_distribution flip(0.5);
  const double delta = 1e-5;
  for (int k = 0; k < 50; ++k) {
    const double y = flip(rng) ? im(rng) : -im(rng);
    const Complex z(re(rng), y);
    CAPTURE(z.real());
    CAPTURE(z.imag());
    const std::array<Complex, 4> plus = ev.lambda_all(z + delta);
    const std::array<Complex, 4> minus = ev.lambda_all(z - delta);
    const SheetValues sv = solve_sheets(pr, z);
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs((plus[j] - minus[j]) / (2.0 * delta) - sv.xi[j]) <= 1e-7);
  }
}

TEST_CASE("h carries the edge normalization") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);
  const SupportData& s = ev.support();

  CHECK(std::abs(ev.h(s.z1) - (-s.z1 * s.z1 / 4.0)) <= 1e-9);

  const double inner = ev.h(2.33);
  CHECK(std::isfinite(inner));
  CHECK(inner == ev.h_extended(2.33));
  CHECK(ev.h(0.0) == ev.h_extended(0.0));
  CHECK(std::isfinite(ev.h(s.z3)));
  CHECK(std::isfinite(ev.h(-s.z3)));

  for (double x : {1.37, -1.37, 5.0, -5.0})
    CHECK_THROWS_AS((void)ev.h(x), OutOfSupport);

  // the extension is continuous through an edge
  CHECK(std::abs(ev.h_extended(s.z2 - 1e-4) - ev.h(s.z2)) <= 1e-3);
  CHECK(std::abs(ev.h_extended(s.z3 + 1e-4) - ev.h(s.z3)) <= 1e-3);
}

TEST_CASE("boundary queries need a side and reflect exactly") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);
  const SupportData& s = ev.support();

  CHECK_THROWS_AS((void)ev.lambda(Complex(2.0, 0.0), 1), ConfigError);
  CHECK_THROWS_AS((void)ev.lambda_all(Complex(2.0, 0.0)), ConfigError);
  CHECK_THROWS_AS((void)ev.lambda(Complex(1.0, 1.0), 0), ConfigError);
  CHECK_THROWS_AS((void)ev.lambda(Complex(1.0, 1.0), 5), ConfigError);
  // right of its ray a sheet needs no side
  CHECK_NOTHROW((void)ev.lambda(Complex(0.5 * (s.z1 + s.z2), 0.0), 3));
  CHECK_NOTHROW((void)ev.lambda(Complex(s.z3 + 0.5, 0.0), 1));

  const Complex above = ev.lambda(Complex(2.0, 0.0), 1, Side::above);
  const Complex below = ev.lambda(Complex(2.0, 0.0), 1, Side::below);
  CHECK(below == std::conj(above));

  // where a sheet's boundary value is real its lambda keeps a constant
  // imaginary part; those constants are what the conjugation identities
  // rest on
  CHECK(std::abs(ev.lambda(Complex(1.37, 0.0), 1, Side::above).imag() -
                 (-(1.0 - pr.t) * kPi / 2.0)) <= 1e-10);
  CHECK(std::abs(ev.lambda(Complex(1.37, 0.0), 3).imag() -
                 (-(1.0 - pr.t) * kPi / 2.0)) <= 1e-10);
  CHECK(std::abs(ev.lambda(Complex(0.5, 0.0), 4).imag() -
                 (-(1.0 + pr.t) * kPi / 2.0)) <= 1e-10);
  CHECK(std::abs(ev.lambda(Complex(-4.0, 0.0), 1, Side::above).imag() - (-kPi)) <= 1e-10);
}

TEST_CASE("values_at bundles one consistent snapshot") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const LambdaEvaluator ev(pr);
  const Complex z(1.1, 0.7);
  const LambdaValues v = ev.values_at(z);
  CHECK(v.z == z);
  CHECK(v.side == Side::off_axis);
  const std::array<Complex, 4> direct = ev.lambda_all(z);
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(v.lambda[j] - direct[j]) == 0.0);
    CHECK(v.l_const[j] == ev.l_constants()[j]);
  }
}

TEST_CASE("free functions mirror the evaluator") {
  const ModelParams pr = ModelParams::three_cut(2.0, 0.5);
  const SupportData s = branch_points(pr);
  const LambdaEvaluator ev(pr);

  const Complex z(0.4, 0.9);
  CHECK(std::abs(lambda(pr, s, z, 2) - ev.lambda(z, 2)) <= 1e-12);
  CHECK(std::abs(integration_constants(pr, s)[0] - ev.l_constants()[0]) <= 1e-12);
  CHECK(std::abs(h_function(pr, s, 2.33) - ev.h(2.33)) <= 1e-12);
  CHECK(check_jump_relations(pr, s, 5).max_residual <= 1e-8);
  CHECK(check_lemma_ordering(pr, s, 3, 1e-3).violations.empty());
}
