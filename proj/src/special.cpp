#include "tricut/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tricut/detail/dawson.hpp"

namespace tricut {

namespace {

using CL = std::complex<long double>;
constexpr long double kInvSqrtPi = 0.564189583547756286948079451560772586L;

// w on the real axis is exact: Re w = exp(-x^2), Im w = 2 D(x)/sqrt(pi).
CL w_axis(long double x) {
  const long double re = std::exp(-x * x);
  const long double im = 2.0L * kInvSqrtPi * detail::dawson<long double>(x);
  return {re, im};
}

// Maclaurin series w(z) = sum (iz)^n / Gamma(n/2 + 1), |z| <= 3.5.
// Worst-case term growth there costs ~5 digits; long double absorbs it.
CL w_series(CL z) {
  static const std::array<long double, 220> inv_gamma = [] {
    std::array<long double, 220> g{};
    g[0] = 1.0L;
    g[1] = 2.0L * kInvSqrtPi;  // 1/Gamma(3/2)
    for (std::size_t n = 2; n < g.size(); ++n)
      g[n] = g[n - 2] * 2.0L / static_cast<long double>(n);
    return g;
  }();
  const CL iz(-z.imag(), z.real());
  CL pow(1.0L, 0.0L);
  CL sum(inv_gamma[0], 0.0L);
  const long double z2 = std::norm(z);
  int small_in_a_row = 0;
  for (std::size_t n = 1; n < inv_gamma.size(); ++n) {
    pow *= iz;
    const CL term = pow * inv_gamma[n];
    sum += term;
    if (static_cast<long double>(n) > z2 &&
        std::abs(term) < 1e-22L * std::abs(sum)) {
      if (++small_in_a_row == 2) break;
    } else {
      small_in_a_row = 0;
    }
  }
  return sum;
}

// Continued fraction w = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(...)))),
// evaluated by backward recurrence.  Used for |z| >= 8 where it converges
// past double precision.
CL w_cf(CL z) {
  const int depth = std::abs(z) > 40.0L ? 24 : 72;
  CL f = z;
  for (int k = depth; k >= 1; --k)
    f = z - (0.5L * static_cast<long double>(k)) / f;
  return CL(0.0L, kInvSqrtPi) / f;
}

// Mid-range points are reached by Taylor-marching the ODE
// w' = -2 z w + 2i/sqrt(pi) DOWNWARD from the circle |z| ~ 8.1 where the
// continued fraction is reliable.  Direction matters: the homogeneous
// component of the ODE behaves like exp(-z^2), which grows as exp(Im z ^2)
// going up, so an upward march would amplify the seed error by e.g. e^36 when
// the target sits at height 6.  Marching down is self-correcting.
CL w_march(long double x, long double y) {
  const long double y_top = std::sqrt(66.0L - x * x);
  CL z0(x, y_top);
  CL w = w_cf(z0);
  const CL ode_const(0.0L, 2.0L * kInvSqrtPi);
  long double remaining = y_top - y;
  while (remaining > 0.0L) {
    const long double step = std::min(0.25L, remaining);
    const CL ds(0.0L, -step);
    CL c_prev = w;
    CL c_cur = -2.0L * z0 * w + ode_const;
    CL pow = ds;
    CL val = c_prev + c_cur * ds;
    for (int m = 1; m < 80; ++m) {
      const CL c_next =
          -2.0L * (z0 * c_cur + c_prev) / static_cast<long double>(m + 1);
      pow *= ds;
      const CL term = c_next * pow;
      val += term;
      c_prev = c_cur;
      c_cur = c_next;
      if (m > 8 && std::abs(term) < 1e-22L * std::abs(val)) break;
    }
    z0 += ds;
    w = val;
    remaining -= step;
  }
  return w;
}

using R80 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<80>>;

struct AirySeeds {
  R80 ai0, aip0;
};

const AirySeeds& airy_seeds() {
  static const AirySeeds s = [] {
    const R80 third = R80(1) / 3;
    const R80 g13 = boost::math::tgamma(third);
    const R80 g23 = boost::math::tgamma(2 * third);
    AirySeeds seeds;
    seeds.ai0 = pow(R80(3), -R80(2) / 3) / g23;
    seeds.aip0 = -pow(R80(3), -third) / g13;
    return seeds;
  }();
  return s;
}

// Maclaurin series of the two fundamental solutions of y'' = x y.  Near
// |x| = 9 the combination for Ai cancels ~16 digits, hence the wide internal
// precision.
AiryValue airy_series(double xd) {
  const AirySeeds& seeds = airy_seeds();
  const R80 x(xd);
  const R80 x2 = x * x;
  const R80 x3 = x2 * x;
  R80 f(1), fp(0), g(x), gp(1);
  R80 tf(1), tg(x);
  for (int k = 1; k < 260; ++k) {
    const R80 tfp = tf * x2 / (3 * k - 1);     // a_k * 3k * x^(3k-1)
    const R80 tgp = tg * x2 / (3 * k);         // b_k * (3k+1) * x^(3k)
    tf = tf * x3 / ((3 * k) * (3 * k - 1));
    tg = tg * x3 / ((3 * k + 1) * (3 * k));
    f += tf;
    fp += tfp;
    g += tg;
    gp += tgp;
    if (k > 10 && abs(tf) < R80(1e-60) && abs(tg) < R80(1e-60)) break;
  }
  const R80 ai = seeds.ai0 * f + seeds.aip0 * g;
  const R80 aip = seeds.ai0 * fp + seeds.aip0 * gp;
  return {static_cast<double>(ai), static_cast<double>(aip)};
}

// u_k, v_k coefficient pair of the standard Airy asymptotic expansions.
struct AiryAsympCoeffs {
  std::array<long double, 44> u, v;
};

const AiryAsympCoeffs& airy_asymp_coeffs() {
  static const AiryAsympCoeffs c = [] {
    AiryAsympCoeffs a;
    a.u[0] = 1.0L;
    a.v[0] = 1.0L;
    for (std::size_t k = 1; k < a.u.size(); ++k) {
      const long double kk = static_cast<long double>(k);
      a.u[k] = a.u[k - 1] * (6.0L * kk - 5.0L) * (6.0L * kk - 1.0L) /
               (72.0L * kk);
      a.v[k] = a.u[k] * (6.0L * kk + 1.0L) / (1.0L - 6.0L * kk);
    }
    return a;
  }();
  return c;
}

AiryValue airy_asymptotic_pos(double xd) {
  const AiryAsympCoeffs& c = airy_asymp_coeffs();
  const long double x = xd;
  const long double zeta = (2.0L / 3.0L) * x * std::sqrt(x);
  long double su = 0.0L, sv = 0.0L;
  long double pw = 1.0L, sign = 1.0L;
  long double prev = 1e30L;
  for (std::size_t k = 0; k < c.u.size(); ++k) {
    const long double tu = c.u[k] * pw;
    if (tu > prev) break;  // series turned divergent
    su += sign * tu;
    sv += sign * c.v[k] * pw;
    prev = tu;
    pw /= zeta;
    sign = -sign;
  }
  const long double quarter_root = std::sqrt(std::sqrt(x));
  const long double pre =
      std::exp(-zeta) * 0.5L * kInvSqrtPi;
  return {static_cast<double>(pre / quarter_root * su),
          static_cast<double>(-pre * quarter_root * sv)};
}

AiryValue airy_asymptotic_neg(double xd) {
  const AiryAsympCoeffs& c = airy_asymp_coeffs();
  const long double x = -static_cast<long double>(xd);  // x > 0
  const long double zeta = (2.0L / 3.0L) * x * std::sqrt(x);
  const long double phase = zeta - std::numbers::pi_v<long double> / 4.0L;
  const long double cs = std::cos(phase), sn = std::sin(phase);
  // even / odd splits sum (-1)^k u_2k / zeta^2k etc., truncated before growth
  long double ue = 0.0L, uo = 0.0L, ve = 0.0L, vo = 0.0L;
  long double pw = 1.0L, sign = 1.0L;
  long double prev = 1e30L;
  for (std::size_t k = 0; k + 1 < c.u.size(); k += 2) {
    const long double tu = c.u[k] * pw;
    if (tu > prev) break;
    prev = tu;
    ue += sign * tu;
    ve += sign * c.v[k] * pw;
    const long double pw1 = pw / zeta;
    uo += sign * c.u[k + 1] * pw1;
    vo += sign * c.v[k + 1] * pw1;
    pw = pw1 / zeta;
    sign = -sign;
  }
  const long double quarter_root = std::sqrt(std::sqrt(x));
  const long double pre = kInvSqrtPi;
  const long double ai = pre / quarter_root * (cs * ue + sn * uo);
  const long double aip = pre * quarter_root * (sn * ve - cs * vo);
  return {static_cast<double>(ai), static_cast<double>(aip)};
}

}  // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
  if (z.imag() < 0.0) {
    // w(z) = 2 exp(-z^2) - w(-z); reduce to the upper half plane
    const std::complex<double> wc = faddeeva_w(std::conj(z));
    return 2.0 * std::exp(-z * z) - std::conj(wc);
  }
  const long double x = z.real();
  const long double y = z.imag();
  if (y == 0.0L) {
    const CL a = w_axis(x);
    return {static_cast<double>(a.real()), static_cast<double>(a.imag())};
  }
  const long double r2 = x * x + y * y;
  CL w;
  if (r2 <= 12.25L)  // |z| <= 3.5
    w = w_series(CL(x, y));
  else if (r2 >= 64.0L)  // |z| >= 8
    w = w_cf(CL(x, y));
  else
    w = w_march(x, y);
  return {static_cast<double>(w.real()), static_cast<double>(w.imag())};
}

double dawson(double x) { return detail::dawson<double>(x); }

AiryValue airy_ai(double x) {
  if (x >= 9.0) return airy_asymptotic_pos(x);
  if (x <= -9.0) return airy_asymptotic_neg(x);
  return airy_series(x);
}

}  // namespace tricut
