#include "tricut/density.hpp"

#include <cmath>
#include <numbers>

#include "tricut/quadrature.hpp"

namespace tricut {
namespace {

constexpr double kMassRelTol = 1e-10;

}  // namespace

bool in_support(const SupportData& support, double x) {
  const double m = 1e-12 * (1.0 + support.z3);
  return (x >= -support.z3 - m && x <= -support.z2 + m) || (std::abs(x) <= support.z1 + m) ||
         (x >= support.z2 - m && x <= support.z3 + m);
}

double rho(const ModelParams& params, const SupportData& support, double x, bool* inside) {
  const bool in = in_support(support, x);
  if (inside) *inside = in;
  if (!in) return 0.0;
  const SheetValues v = solve_sheets(params, Complex(x, 0.0), Side::above);
  return v.xi[0].imag() / std::numbers::pi;
}

std::array<double, 3> masses(const ModelParams& params, const SupportData& support) {
  const double z1 = support.z1, z2 = support.z2, z3 = support.z3;
  const double w = z3 - z2;
  const auto rho_at = [&](double x) { return rho(params, support, x); };

  // x = z2 + w sin^2(theta) and mirror images; the Jacobian w sin(2 theta)
  // cancels the square-root vanishing of rho at both endpoints
  const auto right = [&](double th) {
    const double sn = std::sin(th);
    return rho_at(z2 + w * sn * sn) * w * std::sin(2.0 * th);
  };
  const auto left = [&](double th) {
    const double sn = std::sin(th);
    return rho_at(-z2 - w * sn * sn) * w * std::sin(2.0 * th);
  };
  const auto center = [&](double th) {
    return rho_at(-z1 * std::cos(2.0 * th)) * 2.0 * z1 * std::sin(2.0 * th);
  };

  const double half_pi = std::numbers::pi / 2.0;
  return {integrate(left, 0.0, half_pi, kMassRelTol),
          integrate(center, 0.0, half_pi, kMassRelTol),
          integrate(right, 0.0, half_pi, kMassRelTol)};
}

std::vector<std::pair<double, double>> edge_constants(const ModelParams& params,
                                                      const SupportData& support) {
  const double e1 = detail::edge_constant_from_curvature(params, support.p);
  const double e2 = detail::edge_constant_from_curvature(params, support.q);
  const double e3 = detail::edge_constant_from_curvature(params, support.r);
  return {{support.z1, e1}, {-support.z1, e1}, {support.z2, e2},
          {-support.z2, e2}, {support.z3, e3}, {-support.z3, e3}};
}

DensityCurve make_density_curve(const ModelParams& params, const SupportData& support,
                                int points_per_interval) {
  if (points_per_interval < 2) throw ConfigError("need at least two points per interval");
  DensityCurve curve{support, {}, masses(params, support)};
  const int n = points_per_interval;
  curve.samples.reserve(3 * (n + 1));

  // grids built from the right half and negated, so sample points mirror
  std::vector<double> right_grid(n + 1), center_half(n / 2 + 1);
  for (int k = 0; k <= n; ++k)
    right_grid[k] = support.z2 + (support.z3 - support.z2) * k / n;
  for (int k = 0; k <= n / 2; ++k) center_half[k] = support.z1 * (2.0 * k) / n;

  for (int k = n; k >= 0; --k)
    curve.samples.emplace_back(-right_grid[k], rho(params, support, -right_grid[k]));
  for (int k = n / 2; k >= 1; --k)
    curve.samples.emplace_back(-center_half[k], rho(params, support, -center_half[k]));
  for (int k = 0; k <= n / 2; ++k)
    curve.samples.emplace_back(center_half[k], rho(params, support, center_half[k]));
  for (int k = 0; k <= n; ++k)
    curve.samples.emplace_back(right_grid[k], rho(params, support, right_grid[k]));
  return curve;
}

}  // namespace tricut
