#pragma once

#include <complex>

namespace tricut {

// Scaled complex error function w(z) = exp(-z^2) erfc(-iz).
// Region-switched: exact closed form on the real axis, Maclaurin series for
// small |z|, downward ODE marching from the continued-fraction region in the
// mid range, continued fraction far out.  Lower half plane via w(z) = 2 exp(-z^2) - conj(w(conj z))
// (intrinsically growing there; callers work with Im z >= 0).
std::complex<double> faddeeva_w(std::complex<double> z);

// Dawson integral D(x) = exp(-x^2) \int_0^x exp(t^2) dt.
double dawson(double x);

struct AiryValue {
  double ai;
  double aip;
};

// Ai(x) and Ai'(x).  Maclaurin series in high-precision internal arithmetic
// for |x| < 9 (the two fundamental solutions cancel to ~16 digits near the
// upper end, which double cannot absorb), asymptotic expansions beyond.
AiryValue airy_ai(double x);

}  // namespace tricut
