#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "tricut/errors.hpp"

namespace tricut {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1,1], symmetric
  std::vector<double> w;
};

// Gauss-Legendre rule of order n; Newton iteration on P_n via the three-term
// recurrence.  Rules are cached; safe to call concurrently.
const GaussRule& gauss_rule(int n);

template <class F>
auto gauss_integrate(F&& f, double a, double b, int n) {
  using V = std::invoke_result_t<F&, double>;
  const GaussRule& r = gauss_rule(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  V acc{};
  for (std::size_t i = 0; i < r.x.size(); ++i)
    acc += f(mid + half * r.x[i]) * r.w[i];
  return acc * half;
}

namespace detail {

template <class V>
double value_norm(const V& v) {
  return std::abs(v);
}

template <class F, class V>
V integrate_segment(F& f, double a, double b, double abs_budget_per_len,
                    int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const V whole = gauss_integrate(f, a, b, 16);
  const V left = gauss_integrate(f, a, mid, 16);
  const V right = gauss_integrate(f, mid, b, 16);
  const V refined = left + right;
  const double err = value_norm<V>(whole - refined);
  if (err <= abs_budget_per_len * (b - a)) return refined;
  if (depth >= max_depth)
    throw QuadratureNonConvergence("adaptive quadrature: depth limit reached");
  return integrate_segment<F, V>(f, a, mid, abs_budget_per_len, depth + 1,
                                 max_depth) +
         integrate_segment<F, V>(f, mid, b, abs_budget_per_len, depth + 1,
                                 max_depth);
}

}  // namespace detail

// Adaptive bisection with a G16 / G16+G16 error estimate.  The error budget
// is distributed proportionally to segment length, scaled by integral of |f|
// so that integrands with cancelling lobes still terminate.  Throws
// QuadratureNonConvergence past max_depth.
template <class F>
auto integrate(F&& f, double a, double b, double rel_tol, int max_depth = 30) {
  using V = std::invoke_result_t<F&, double>;
  double scale = gauss_integrate(
      [&](double s) { return detail::value_norm<V>(f(s)); }, a, b, 32);
  scale += 1e-300;
  const double budget_per_len = rel_tol * scale / (b - a);
  return detail::integrate_segment<std::remove_reference_t<F>, V>(
      f, a, b, budget_per_len, 0, max_depth);
}

}  // namespace tricut
