#pragma once

#include <cmath>
#include <limits>

namespace tricut::detail {

// Dawson integral D(x) = exp(-x^2) \int_0^x exp(t^2) dt, for any real scalar
// type.  Two regimes, both free of subtractive cancellation:
//   |x| below the switch point: D(x) = exp(-x^2) * sum_k x^(2k+1)/(k! (2k+1)),
//   a positive-term series whose sum has the same scale as its largest term;
//   |x| above: the divergent asymptotic series (1/2x) sum_k (2k-1)!!/(2x^2)^k,
//   truncated at its smallest term.  The switch point is chosen so the
//   asymptotic floor exp(-x^2) sits below the scalar's epsilon.
template <class Real>
Real dawson(Real x) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::sqrt;

  const Real ax = abs(x);
  if (ax == Real(0)) return Real(0);

  const int digits10 = std::numeric_limits<Real>::digits10;
  const Real switch_x = sqrt(Real(digits10 + 3) * log(Real(10))) + Real(1);

  Real result;
  if (ax < switch_x) {
    const Real x2 = ax * ax;
    Real term = ax;  // k = 0: x / (0! * 1)
    Real sum = ax;
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int k = 1; k < 100000; ++k) {
      term *= x2 / Real(k);
      const Real contrib = term / Real(2 * k + 1);
      sum += contrib;
      if (contrib < eps * sum) break;
    }
    result = exp(-x2) * sum;
  } else {
    const Real inv2x2 = Real(1) / (Real(2) * ax * ax);
    Real term = Real(1);
    Real sum = Real(1);
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int k = 1; k < 100000; ++k) {
      const Real next = term * Real(2 * k - 1) * inv2x2;
      if (next >= term) break;  // past the smallest term
      term = next;
      sum += term;
      if (term < eps * sum) break;
    }
    result = sum / (Real(2) * ax);
  }
  return x < Real(0) ? -result : result;
}

}  // namespace tricut::detail
