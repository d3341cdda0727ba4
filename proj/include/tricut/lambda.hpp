#pragma once

#include <array>
#include <complex>
#include <mutex>
#include <string>
#include <vector>

#include "tricut/spectral_curve.hpp"

namespace tricut {

// Tuning knobs for the contour integration; the defaults satisfy every
// documented tolerance.  elevation_scale multiplies the cut clearance
// Im = 1e-3 (1 + z3); panel_split subdivides every quadrature panel, which
// exists so path-refinement stability can be demonstrated, not for accuracy.
struct LambdaOptions {
  double elevation_scale = 1.0;
  int panel_split = 1;
};

// The four antiderivatives at one point together with the normalization
// constants of their large-z expansions.
struct LambdaValues {
  Complex z;
  std::array<Complex, 4> lambda;   // sheet j at lambda[j-1]
  std::array<Complex, 4> l_const;  // l1..l4
  Side side = Side::off_axis;
};

struct JumpResidual {
  std::string relation;
  double lo = 0, hi = 0;  // sampled interval (unbounded rays truncated)
  int samples = 0;
  double max_residual = 0;
};

struct JumpReport {
  std::vector<JumpResidual> relations;
  double max_residual = 0;
};

struct LemmaViolation {
  Complex z;
  double margin = 0;  // Re lambda_expected - best competitor, negative here
};

struct LemmaReport {
  int interval = 0;        // 1: (-z3,-z2), 2: (-z1,z1), 3: (z2,z3)
  int expected_sheet = 0;  // 4, 3, 2 respectively
  double offset = 0;
  int samples = 0;
  double min_margin = 0;
  std::vector<LemmaViolation> violations;
};

// Evaluates lambda_j(z) = integral of xi_j from its normalization anchor,
// along piecewise-linear paths elevated above the cuts.  lambda_1, lambda_2
// vanish at z3; lambda_3 takes the value lambda_1+(z1) at z1 and lambda_4
// takes lambda_1+(-z2) at -z2.  Everything is computed in the closed upper
// half plane; lower-half values follow from the reflection identities
// lambda_j(conj z) = conj(lambda_j(z)) + c_j with purely imaginary c_j.
class LambdaEvaluator {
 public:
  explicit LambdaEvaluator(const ModelParams& params, LambdaOptions options = {});

  const ModelParams& params() const { return pr_; }
  const SupportData& support() const { return s_; }

  // lambda_j is multivalued on its jump ray (-infty, ray_end_j]; queries
  // there must name a side.  Elsewhere side is ignored.
  Complex lambda(Complex z, int sheet, Side side = Side::off_axis) const;

  // All four sheets at once (three path runs instead of four).
  std::array<Complex, 4> lambda_all(Complex z, Side side = Side::off_axis) const;

  LambdaValues values_at(Complex z, Side side = Side::off_axis) const;

  // l1..l4, extracted from the expansions at |z| = 1e3; computed once.
  const std::array<Complex, 4>& l_constants() const;

  // h(x) = -x^2/4 + Re integral_{z1}^{x} xi_1+, the exponent used by the
  // rescaled finite-n kernel.  Throws OutOfSupport outside the closed
  // support; h_extended is the same expression on all of the real line
  // (the real part of lambda_1+ is continuous there).
  double h(double x) const;
  double h_extended(double x) const;

  JumpReport jump_report(int n_samples) const;
  LemmaReport lemma_report(int interval, double offset) const;

 private:
  std::array<Complex, 4> path_integrals(double anchor_x, Complex target) const;
  std::array<Complex, 4> above_values(Complex z) const;
  double ray_end(int sheet) const;

  ModelParams pr_;
  SupportData s_;
  double elevation_;
  int split_;
  Complex lam1p_z1_, lam1p_mz2_;  // lambda_1+ at z1 and at -z2
  mutable std::once_flag l_once_;
  mutable std::array<Complex, 4> l_{};
};

// Free-function forms; each builds a fresh evaluator, so prefer holding a
// LambdaEvaluator when making repeated queries.
Complex lambda(const ModelParams& params, const SupportData& support, Complex z, int sheet,
               Side side = Side::off_axis);
std::array<Complex, 4> integration_constants(const ModelParams& params,
                                             const SupportData& support);
JumpReport check_jump_relations(const ModelParams& params, const SupportData& support,
                                int n_samples);
LemmaReport check_lemma_ordering(const ModelParams& params, const SupportData& support,
                                 int interval, double offset);
double h_function(const ModelParams& params, const SupportData& support, double x);

}  // namespace tricut
