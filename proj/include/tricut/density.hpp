#pragma once

#include <array>
#include <utility>
#include <vector>

#include "tricut/spectral_curve.hpp"

namespace tricut {

// True when x lies in the closed support [-z3,-z2] u [-z1,z1] u [z2,z3].
bool in_support(const SupportData& support, double x);

// Limiting eigenvalue density rho(x) = (1/pi) Im xi_1+(x).  Outside the
// closed support the value is exactly 0 and *inside (when given) is cleared;
// queries there are not an error so histogram comparisons stay total.
double rho(const ModelParams& params, const SupportData& support, double x,
           bool* inside = nullptr);

// Masses of the three support intervals, (outer-left, center, outer-right);
// they come out as ((1-t)/2, t, (1-t)/2).  Square-root endpoint behaviour is
// absorbed by a sin^2 substitution before the adaptive quadrature runs.
std::array<double, 3> masses(const ModelParams& params, const SupportData& support);

// The six square-root edge constants keyed by edge point, computed from the
// curvature of the parametrization at the paired critical point (the fit of
// the density itself is a test oracle, not the implementation).
std::vector<std::pair<double, double>> edge_constants(const ModelParams& params,
                                                      const SupportData& support);

// A sampled density: ordered (x, rho) pairs across the three intervals with
// mirror-symmetric grid points, plus the interval masses.  Immutable once
// built.
struct DensityCurve {
  SupportData support;
  std::vector<std::pair<double, double>> samples;
  std::array<double, 3> masses{};
};

DensityCurve make_density_curve(const ModelParams& params, const SupportData& support,
                                int points_per_interval = 200);

}  // namespace tricut
