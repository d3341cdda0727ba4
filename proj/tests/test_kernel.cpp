#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "tricut/density.hpp"
#include "tricut/errors.hpp"
#include "tricut/finite.hpp"
#include "tricut/lambda.hpp"
#include "tricut/quadrature.hpp"

namespace {

using tricut::Complex;
using tricut::FiniteEvaluator;
using tricut::FiniteSizeParams;
using tricut::Side;

constexpr double kPi = std::numbers::pi;

FiniteSizeParams sized(int n) { return FiniteSizeParams::split(n, 0.5, 2.0); }

}  // namespace

TEST_CASE("the determinant of Y is one across both precision profiles") {
  const Complex pts[] = {{2.0, 0.5}, {-1.0, 2.0}, {0.3, 0.01}, {8.0, 1.0}};
  for (int n : {3, 6, 12}) {
    const FiniteEvaluator ev(sized(n));
    for (const Complex& z : pts) {
      const tricut::YMatrix y = ev.y_matrix(z);
      CHECK(y.det_residual < 1e-9);
      CHECK(std::abs(y.y.determinant() - 1.0) < 1e-9);
    }
    const tricut::YMatrix onax = ev.y_matrix(Complex(0.9, 0.0), Side::above);
    CHECK(onax.det_residual < 1e-9);
  }
}

TEST_CASE("Y jumps by the weight matrix across the axis") {
  for (int n : {6, 12}) {
    const FiniteEvaluator ev(sized(n));
    const double a = ev.params().a;
    for (double x : {0.9, -2.6, 1.8}) {
      const Eigen::Matrix4cd above = ev.y_matrix(Complex(x, 0), Side::above).y;
      const Eigen::Matrix4cd below = ev.y_matrix(Complex(x, 0), Side::below).y;
      Eigen::Matrix4cd jump = Eigen::Matrix4cd::Identity();
      const double as[3] = {a, 0.0, -a};
      for (int j = 0; j < 3; ++j)
        jump(0, j + 1) = std::exp(-n * (0.5 * x * x - as[j] * x));
      const double scale = below.cwiseAbs().maxCoeff();
      CHECK((above - below * jump).cwiseAbs().maxCoeff() < 1e-8 * scale);
    }
    // the axis needs a declared side
    CHECK_THROWS_AS(ev.y_matrix(Complex(0.5, 0.0)), tricut::ConfigError);
  }
}

TEST_CASE("Y solves the differential equation in z") {
  for (int n : {3, 6, 12}) {
    const FiniteEvaluator ev(sized(n));
    for (const Complex& z : {Complex(1.0, 1.0), Complex(-0.7, 0.4), Complex(2.5, -1.2)}) {
      CHECK(ev.ode_residual(z) < 1e-7);
    }
    // reflection invariance of the residual
    const double up = ev.ode_residual(Complex(1.2, 0.8));
    const double mr = ev.ode_residual(Complex(-1.2, 0.8));
    CHECK(std::abs(up - mr) < 1e-8);

    CHECK_THROWS_AS(ev.ode_residual(Complex(1.0, 0.0)), tricut::ConfigError);
  }
}

TEST_CASE("the step in every index slot satisfies the recurrence") {
  for (int n : {3, 6, 12}) {
    const FiniteEvaluator ev(sized(n));
    const auto& p = ev.params();
    const tricut::MopIndex idx{p.n1, p.n2, p.n3};
    for (const Complex& z : {Complex(1.0, 1.0), Complex(0.3, 2.0)}) {
      CHECK(ev.recurrence_residual(idx, z) < 1e-7);
    }
  }
}

TEST_CASE("free verification helpers match the evaluator") {
  const FiniteSizeParams p = sized(6);
  const Complex z(1.0, 1.0);
  const FiniteEvaluator ev(p);
  CHECK(tricut::verify_ode(p, z) == doctest::Approx(ev.ode_residual(z)).epsilon(1e-10));
  const tricut::MopIndex idx{p.n1, p.n2, p.n3};
  CHECK(tricut::verify_recurrence(p, idx, z) ==
        doctest::Approx(ev.recurrence_residual(idx, z)).epsilon(1e-10));
  const tricut::YMatrix y1 = tricut::assemble_Y(p, z);
  const tricut::YMatrix y2 = ev.y_matrix(z);
  CHECK((y1.y - y2.y).cwiseAbs().maxCoeff() < 1e-12 * y2.y.cwiseAbs().maxCoeff());
}

TEST_CASE("the diagonal integrates to the matrix size") {
  for (int n : {3, 6}) {
    const FiniteEvaluator ev(sized(n));
    const double trace = tricut::integrate(
        [&](double x) { return ev.kernel(x, x).kn; }, -7.0, 7.0, 1e-9);
    CHECK(std::abs(trace - n) < 1e-6 * n);
  }
}

TEST_CASE("kernel values reproduce through the explicit inverse") {
  for (int n : {6, 12}) {
    const FiniteEvaluator ev(sized(n));
    const auto& p = ev.params();
    const double x = 2.2, y = 2.6;
    const Eigen::Matrix4cd Yx = ev.y_matrix(Complex(x, 0), Side::above).y;
    const Eigen::Matrix4cd Yy = ev.y_matrix(Complex(y, 0), Side::above).y;
    Eigen::RowVector4cd row = Eigen::RowVector4cd::Zero();
    const double as[3] = {p.a, 0.0, -p.a};
    for (int j = 0; j < 3; ++j) row(j + 1) = std::exp(p.N * as[j] * y);
    const Complex s = (row * Yy.inverse() * Yx * Eigen::Vector4cd::Unit(0))(0);
    const double direct = std::exp(-p.N * (x * x + y * y) / 4.0) * s.imag() /
                          (2 * kPi * (x - y));
    const double kn = ev.kernel(x, y).kn;
    CHECK(std::abs(kn - direct) < 1e-10 * std::abs(kn));
  }
}

TEST_CASE("the kernel inherits the mirror symmetry of the weights") {
  for (int n : {6, 12}) {
    const FiniteEvaluator ev(sized(n));
    const double k1 = ev.kernel(2.2, 2.6).kn;
    const double k2 = ev.kernel(-2.2, -2.6).kn;
    CHECK(std::abs(k1 - k2) < 1e-12 * std::abs(k1));
    const double d1 = ev.kernel(0.8, 0.8).kn;
    const double d2 = ev.kernel(-0.8, -0.8).kn;
    CHECK(std::abs(d1 - d2) < 1e-12 * std::abs(d1));
  }
}

TEST_CASE("diagonal and near-diagonal evaluations agree") {
  const FiniteEvaluator ev(sized(6));
  const double x = 1.1;
  const double diag = ev.kernel(x, x).kn;           // derivative branch
  const double near = ev.kernel(x, x + 1e-5).kn;    // difference branch
  CHECK(std::abs(diag - near) < 1e-3 * std::abs(diag));
  // inside the collapse window the derivative branch takes over smoothly
  const double tiny = ev.kernel(x, x + 1e-9).kn;
  CHECK(std::abs(diag - tiny) < 1e-6 * std::abs(diag));
}

TEST_CASE("the conjugated kernel carries the documented exponent") {
  const FiniteEvaluator ev(sized(12));
  const auto& p = ev.params();
  const tricut::ModelParams mp = tricut::ModelParams::three_cut(p.a, p.t());
  const tricut::LambdaEvaluator lam(mp);

  const double x = 2.2, y = 2.8;
  const tricut::KernelEval k = ev.kernel(x, y);
  const double expected = std::exp(p.N * (lam.h(x) - lam.h(y))) * k.kn;
  CHECK(k.hat_kn == doctest::Approx(expected).epsilon(1e-10));
  CHECK(ev.hat_kernel(x, y) == doctest::Approx(expected).epsilon(1e-10));

  // on the diagonal the exponent cancels exactly
  CHECK(ev.kernel(x, x).hat_kn == doctest::Approx(ev.kernel(x, x).kn));

  // off the support the conjugation is undefined
  const double outside = ev.support().z3 + 0.5;
  CHECK_THROWS_AS(ev.hat_kernel(outside, outside), tricut::OutOfSupport);
  CHECK(std::isnan(ev.kernel(outside, outside).hat_kn));
  CHECK(ev.kernel(outside, outside).kn > 0);  // the raw kernel still evaluates
}

TEST_CASE("the scaled diagonal tracks the limiting density") {
  // frozen from the measured convergence at the three interior midpoints:
  // max errors 1.35e-2 / 5.12e-3 / 2.43e-3 at n = 12 / 24 / 48
  const tricut::ModelParams mp = tricut::ModelParams::three_cut(2.0, 0.5);
  const tricut::SupportData s = tricut::branch_points(mp);
  const double mid = 0.5 * (s.z2 + s.z3);

  const FiniteEvaluator ev(sized(12));
  for (double x : {-mid, 0.0, mid}) {
    const double kd = ev.kernel(x, x).kn / 12.0;
    const double limit = tricut::rho(mp, s, x);
    CHECK(std::abs(kd - limit) < 2e-2);
  }

  // far outside the support the diagonal is already negligible at n = 12
  CHECK(ev.kernel(s.z3 + 0.5, s.z3 + 0.5).kn / 12.0 < 1e-3);
}

TEST_CASE("support accessor requires the three cut phase") {
  const FiniteEvaluator ev(FiniteSizeParams::split(6, 0.5, 1.2));  // a^2 < 3
  CHECK_THROWS_AS(ev.support(), tricut::PhaseError);
  CHECK_THROWS_AS(ev.hat_kernel(0.1, 0.1), tricut::PhaseError);
  // the finite-n machinery itself has no phase restriction
  CHECK(ev.kernel(0.1, 0.1).kn > 0);
}
