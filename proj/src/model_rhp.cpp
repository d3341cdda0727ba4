#include "tricut/model_rhp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "tricut/errors.hpp"

namespace tricut {
namespace {

constexpr double kEdgeExclusion = 1e-8;

// s(xi) = xi^3 sqrt(1 - p^2/xi^2) sqrt(1 - q^2/xi^2) sqrt(1 - r^2/xi^2) with
// principal roots, so s ~ xi^3 at infinity and the cuts of this product lie on
// the real segments [-p, p] and +-[q, r].  Sheets of the upper z half plane
// land where the product agrees with the arc-branched s of the parametrix;
// the lower half plane is off by the column signs applied in model_solution.
Complex s_value(const SupportData& s, Complex xi) {
  const Complex inv2 = 1.0 / (xi * xi);
  return xi * xi * xi * std::sqrt(1.0 - s.p * s.p * inv2) *
         std::sqrt(1.0 - s.q * s.q * inv2) * std::sqrt(1.0 - s.r * s.r * inv2);
}

// dxi/dz = -F_z / F_xi on the curve; real and nonzero on the real axis away
// from the branch points.  Only the sign is consumed.
double sheet_slope(const ModelParams& pr, double x, double xi) {
  const double fxi = ((4 * xi - 3 * x) * xi + 2 * (1 - pr.b)) * xi + pr.b * x;
  return (xi * xi - pr.b) * xi / fxi;
}

}  // namespace

ModelConstants model_constants(const ModelParams& params) {
  if (params.b <= 3)
    throw PhaseError("model parametrix requires the three-cut phase (a^2 > 3)");
  const Complex mi(0, -1);
  ModelConstants c;
  c.c2 = mi * std::sqrt((1 - params.t) / 2);
  c.c3 = mi * std::sqrt(params.t);
  c.c4 = c.c2;
  return c;
}

ModelSolution model_solution(const ModelParams& params, const SupportData& support,
                             Complex z, Side side) {
  const ModelConstants c = model_constants(params);
  for (double edge : {support.z1, support.z2, support.z3})
    for (double sgn : {1.0, -1.0})
      if (std::abs(z - sgn * edge) < kEdgeExclusion)
        throw BranchPointSingularity("model parametrix evaluated at a support edge");

  const SheetValues sheets = solve_sheets(params, z, side);
  std::array<Complex, 4> xi = sheets.xi;

  // Boundary and gap values: sheet values on the axis carry either an exact
  // zero (snapped) or an O(eps^2) extrapolation remainder of uncontrolled sign
  // in the imaginary part.  Both cases get the side of approach re-imposed as
  // an infinitesimal, so the principal roots in s_value resolve the correct
  // side of the real-segment cuts; the colliding pair on a cut stays far from
  // the 1e-6 threshold outside the excluded edge balls.
  const bool from_below = z.imag() < 0 || (z.imag() == 0 && side == Side::below);
  if (z.imag() == 0) {
    const double dir = from_below ? -1 : 1;
    for (Complex& v : xi) {
      const double scale = 1 + std::abs(v);
      if (std::abs(v.imag()) > 1e-6 * scale) continue;
      const double slope = sheet_slope(params, z.real(), v.real());
      v = Complex(v.real(), dir * std::copysign(1e-30 * scale, slope));
    }
  }

  ModelSolution out;
  out.z = z;
  out.side = sheets.side;
  for (int j = 0; j < 4; ++j) {
    // Sheets 2, 3, 4 of the lower half plane map into the upper half lenses,
    // where the real-segment product differs from the arc branch by a sign.
    const double col = from_below && j > 0 ? -1 : 1;
    const Complex x = xi[j];
    const Complex s = s_value(support, x);
    out.m(0, j) = col * x * (x * x - params.b) / s;
    out.m(1, j) = col * c.c2 * x * (x + params.a) / s;
    out.m(2, j) = col * c.c3 * (x * x - params.b) / s;
    out.m(3, j) = col * c.c4 * x * (x - params.a) / s;
  }
  return out;
}

ModelJumpReport verify_model_jumps(const ModelParams& params, const SupportData& support,
                                   int n_samples) {
  if (n_samples < 1) throw ConfigError("verify_model_jumps needs n_samples >= 1");

  // Constant jump matrices: on each cut the two colliding sheets swap with a
  // sign, (1, j): +1 and (j, 1): -1 for j = 2, 3, 4; identity elsewhere.
  Eigen::Matrix4cd right = Eigen::Matrix4cd::Identity();
  right(0, 0) = right(1, 1) = 0;
  right(0, 1) = 1;
  right(1, 0) = -1;
  Eigen::Matrix4cd central = Eigen::Matrix4cd::Identity();
  central(0, 0) = central(2, 2) = 0;
  central(0, 2) = 1;
  central(2, 0) = -1;
  Eigen::Matrix4cd left = Eigen::Matrix4cd::Identity();
  left(0, 0) = left(3, 3) = 0;
  left(0, 3) = 1;
  left(3, 0) = -1;

  struct CutSpec {
    double lo, hi;
    Eigen::Matrix4cd jump;
  };
  const std::array<CutSpec, 3> specs = {
      CutSpec{support.z2, support.z3, right},
      CutSpec{-support.z1, support.z1, central},
      CutSpec{-support.z3, -support.z2, left}};

  ModelJumpReport report;
  for (const CutSpec& spec : specs) {
    ModelJumpCut cut;
    cut.lo = spec.lo;
    cut.hi = spec.hi;
    cut.samples = n_samples;
    for (int k = 0; k < n_samples; ++k) {
      const double x = spec.lo + (k + 0.5) / n_samples * (spec.hi - spec.lo);
      const Eigen::Matrix4cd above = model_solution(params, support, x, Side::above).m;
      const Eigen::Matrix4cd below = model_solution(params, support, x, Side::below).m;
      const double res = (above - below * spec.jump).cwiseAbs().maxCoeff();
      cut.max_residual = std::max(cut.max_residual, res);
    }
    report.max_residual = std::max(report.max_residual, cut.max_residual);
    report.cuts.push_back(cut);
  }
  return report;
}

}  // namespace tricut
