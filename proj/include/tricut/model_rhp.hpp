#pragma once

#include <Eigen/Core>
#include <vector>

#include "tricut/spectral_curve.hpp"

namespace tricut {

// c2, c3, c4 normalize the square-root rows so each one equals 1 at its own
// sheet anchor.  All three are purely imaginary.
struct ModelConstants {
  Complex c2, c3, c4;
};

// The global parametrix at one point.  Entry (k, j), zero-based, holds
// M_{k+1}(xi_{j+1}(z)): four rational-over-square-root functions composed
// with the four sheets.  m -> identity as z -> infinity; columns blow up
// like |z -+ z_j|^{-1/4} at the branch points.
struct ModelSolution {
  Complex z;
  Eigen::Matrix4cd m;
  Side side = Side::off_axis;
};

struct ModelJumpCut {
  double lo = 0, hi = 0;
  int samples = 0;
  double max_residual = 0;  // max entry of |M_plus - M_minus J| over the cut
};

struct ModelJumpReport {
  std::vector<ModelJumpCut> cuts;  // right, central, left
  double max_residual = 0;
};

ModelConstants model_constants(const ModelParams& params);

// Evaluates the parametrix.  On a cut the side names the approach limit;
// off the cuts it is ignored.  Throws BranchPointSingularity within 1e-8 of
// any +-z_j, ConfigError for an on-cut query without a side.
ModelSolution model_solution(const ModelParams& params, const SupportData& support,
                             Complex z, Side side = Side::off_axis);

// Checks M_plus = M_minus J on all three cuts against the constant
// permutation-sign jump matrices, at n_samples interior points each.
ModelJumpReport verify_model_jumps(const ModelParams& params, const SupportData& support,
                                   int n_samples);

}  // namespace tricut
