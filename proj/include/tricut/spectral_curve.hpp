#pragma once

#include <array>
#include <complex>
#include <vector>

#include "tricut/errors.hpp"

namespace tricut {

using Complex = std::complex<double>;

// Parameters of the three-point external source {-a, 0, a} with weight
// fractions t1 = t3 = (1 - t)/2 on the outer points and t on the middle one.
// The associated algebraic curve is
//
//   xi^4 - z xi^3 + (1 - a^2) xi^2 + a^2 z xi - t a^2 = 0,
//
// and the support of the limiting eigenvalue distribution splits into three
// intervals exactly when b = a^2 > 3.
struct ModelParams {
  double a = 0;
  double t = 0;
  double b = 0;   // a^2, kept separately since the phase criteria live in b
  double t1 = 0;  // (1 - t)/2
  double t3 = 0;  // (1 - t)/2

  // Requires a > 0 and t in (0, 1); additionally requires a^2 > 3 so the
  // three-cut machinery (sheet labels, branch points) is well defined.
  static ModelParams three_cut(double a, double t);

  // Same validation without the phase restriction; for classification only.
  static ModelParams general(double a, double t);
};

// Which boundary value is requested when z sits on a cut of the real axis.
enum class Side { above, below, off_axis };

// The four solutions of the curve at a point z, labeled by their large-z
// behaviour: xi1 ~ z - 1/z, xi2 ~ a + t1/z, xi3 ~ t/z, xi4 ~ -a + t3/z.
struct SheetValues {
  Complex z;
  std::array<Complex, 4> xi;  // sheet j at xi[j - 1]
  Side side = Side::off_axis;
};

// Critical points of z(xi) and the induced endpoints of the support.
struct SupportData {
  std::array<double, 3> y_roots{};  // roots of the critical cubic in y = xi^2
  double p = 0, q = 0, r = 0;       // sqrt of y_roots, ascending
  double z1 = 0, z2 = 0, z3 = 0;    // branch points z(p) < z(q) < z(r)

  // Square-root constants at the six edges +-z1, +-z2, +-z3, keyed by the
  // edge location; filled by branch_points(), empty from critical_points().
  std::vector<std::pair<double, double>> rho_edge;
};

// Looks up rho_edge with a tolerant key comparison; throws ConfigError if
// the edge is not present.
double edge_constant(const SupportData& support, double edge);

// Discriminant data controlling the phase diagram in (b, t).
struct PhaseReport {
  enum class Phase { ThreeCut, Boundary, Unsupported };
  double delta = 0;    // discriminant of the critical cubic
  double delta_c = 0;  // cubic-in-t cofactor: delta = (1 - t) b^2 delta_c
  double delta_q = 0;  // discriminant of delta_c in t: -3 (b-3) (5b+1)^3
  Phase phase = Phase::Unsupported;
};

// The rational parametrization z(xi) = (xi^4 + (1-a^2) xi^2 - t a^2) /
// (xi^3 - a^2 xi).  Throws PoleAtXi within 1e-14 (relative) of {0, +-a}.
Complex evaluate_z_of_xi(const ModelParams& params, Complex xi);

// All four sheet values at z.  For real z on a cut, side selects the boundary
// value (off_axis there is a ConfigError); elsewhere side is ignored.
SheetValues solve_sheets(const ModelParams& params, Complex z,
                         Side side = Side::off_axis);

// Roots of the critical cubic and their square roots; rho_edge left empty.
// Throws PhaseError unless b > 3.
SupportData critical_points(const ModelParams& params);

// critical_points plus the branch points z1 < z2 < z3 and the edge constants.
// Throws OrderingViolation if the computed points fail 0 < z1 < z2 < z3.
SupportData branch_points(const ModelParams& params);

// Total on a > 0, t in (0, 1); never throws for such input.
PhaseReport discriminants(const ModelParams& params);

// Phase from b alone: ThreeCut if b > 3, Boundary within 1e-12 of b = 3,
// Unsupported otherwise.  The discriminant fields are filled regardless.
PhaseReport classify_phase(const ModelParams& params);

// Continues the labeled roots along caller-supplied polyline paths in the
// closed upper half plane.  The step size adapts so that no two tracked roots
// are ever matched across more than half their current separation; if two
// roots approach within 1e-8 the path is perturbed upward once and retried
// before ContinuationFailure is thrown.  Segments that cross a cut
// transversally are rejected with PathCrossesCut.
class SheetTracker {
 public:
  explicit SheetTracker(const ModelParams& params);

  // Continues the labels along the straight segment from the current point.
  const std::array<Complex, 4>& advance_to(Complex z);

  // Restarts from the anchor point without re-deriving the labels.
  void reset();

  const std::array<Complex, 4>& values() const { return xi_; }
  Complex where() const { return z_; }
  const ModelParams& params() const { return params_; }

 private:
  const std::array<Complex, 4>& advance_along(Complex target, bool may_perturb);

  ModelParams params_;
  double z1_ = 0, z2_ = 0, z3_ = 0;  // cut layout for crossing checks
  Complex anchor_;
  std::array<Complex, 4> anchor_xi_;
  Complex z_;
  std::array<Complex, 4> xi_;
};

namespace detail {

// sqrt(2 / |z''(xi_c)|) at a critical point xi_c of the parametrization;
// shared between the support construction and the edge density checks.
// Throws DegenerateEdge when |z''| < 1e-10.
double edge_constant_from_curvature(const ModelParams& params, double xi_c);

}  // namespace detail

}  // namespace tricut
