#pragma once

#include <array>
#include <complex>
#include <memory>

#include <Eigen/Core>

#include "tricut/spectral_curve.hpp"

namespace tricut {

// Matrix size and source multiplicities of one finite ensemble.  The weight
// scale N always equals n; both names survive because the differential
// equation is written in N while the asymptotic statements count in n.
struct FiniteSizeParams {
  int n = 0;
  int n1 = 0, n2 = 0, n3 = 0;  // multiplicities of the sources +a, 0, -a
  double a = 0;
  int N = 0;

  // n2 = round(t n), moved by one where needed so n - n2 is even (toward
  // t n); n1 = n3 = (n - n2) / 2.  ConfigError unless every multiplicity
  // comes out >= 1 and a > 0.
  static FiniteSizeParams split(int n, double t, double a);

  // Explicit multiplicities; n1 == n3 >= 1, n2 >= 1 and a > 0 are required.
  static FiniteSizeParams counts(int n1, int n2, int n3, double a);

  double t() const { return static_cast<double>(n2) / n; }
};

// Multi-index of one polynomial family.  The ensemble kernel uses
// (n1, n2, n3); recurrence checks and the lowered rows of Y use neighbours.
struct MopIndex {
  int k1 = 0, k2 = 0, k3 = 0;

  int degree() const { return k1 + k2 + k3; }
  friend bool operator==(const MopIndex&, const MopIndex&) = default;
};

// One weighted moment.  value overflows to +-inf for extreme N a^2 while
// log_abs and sign always stay finite; sign is 0 (and log_abs -inf) for the
// odd moments that vanish exactly.
struct MomentValue {
  double value = 0;
  double log_abs = 0;
  int sign = 0;
};

// A monic polynomial with prescribed weighted-moment kills: the x^m moment
// against weight j vanishes for m < k_j.  coeffs is ascending with
// coeffs[degree] == 1.  Solved in extended precision regardless of the
// evaluation profile, so the entries are correctly rounded doubles even
// where the orthogonality system is nearly singular; condition carries the
// system's estimate.
struct MopFamily {
  MopIndex index;
  Eigen::VectorXd coeffs;
  double sub_leading = 0;                    // coefficient of x^{degree-1}
  std::array<double, 3> norms{};             // first surviving moment, slot j
  std::array<double, 3> q_norms{};           // one moment above the norm
  std::array<std::complex<double>, 3> c_consts{};  // -2 pi i / lowered norm; 0 if k_j = 0
  double condition = 0;
};

// The 4x4 solution joining the polynomial row to its three Cauchy-transform
// columns.  side matters only on the real axis, where the transform columns
// jump; the determinant is identically 1 and det_residual reports |det - 1|
// as realized.
struct YMatrix {
  Complex z;
  Side side = Side::off_axis;
  Eigen::Matrix4cd y;
  double det_residual = 0;
};

struct KernelEval {
  double x = 0, y = 0;
  double kn = 0;
  double hat_kn = 0;  // NaN when either argument leaves the support
  int n = 0;
};

// Scalar profile for the evaluation pipeline.  automatic picks double up to
// n = 6 and the 80-digit scalar beyond, which is where the orthogonality
// conditioning exhausts double; narrow and wide force one side.  A narrow
// evaluator at large n is permitted but its transforms will surface
// PrecisionLoss once their running error estimates degrade.
enum class Profile { automatic, narrow, wide };

// Finite-n engine for one parameter set: weighted moments, the orthogonality
// solves (families are cached; concurrent readers are safe), Cauchy
// transforms, Y and the two-point kernel.  Every transform carries a running
// error estimate, and a query no path can answer accurately surfaces
// PrecisionLoss instead of a degraded value.
class FiniteEvaluator {
 public:
  explicit FiniteEvaluator(const FiniteSizeParams& params,
                           Profile profile = Profile::automatic);
  ~FiniteEvaluator();
  FiniteEvaluator(FiniteEvaluator&&) noexcept;
  FiniteEvaluator& operator=(FiniteEvaluator&&) noexcept;

  const FiniteSizeParams& params() const;

  // Limiting support for t = n2/n; built on first use (requires a^2 > 3).
  const SupportData& support() const;

  MomentValue moment(int j, int k) const;
  MopFamily family(const MopIndex& index) const;

  Complex cauchy(const MopIndex& index, int j, Complex z,
                 Side side = Side::off_axis) const;

  YMatrix y_matrix(Complex z, Side side = Side::off_axis) const;

  KernelEval kernel(double x, double y) const;

  // exp(N (h(x) - h(y))) K_n(x, y); OutOfSupport off the closed support.
  double hat_kernel(double x, double y) const;

  double ode_residual(Complex z) const;
  double recurrence_residual(const MopIndex& index, Complex z) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Free-function forms; each builds a fresh evaluator, so prefer holding a
// FiniteEvaluator when making repeated queries.
MomentValue moments(const FiniteSizeParams& params, int j, int k);
MopFamily mop_build(const FiniteSizeParams& params, const MopIndex& index);
Complex cauchy_transform(const FiniteSizeParams& params, const MopFamily& family,
                         int j, Complex z, Side side = Side::off_axis);
YMatrix assemble_Y(const FiniteSizeParams& params, Complex z,
                   Side side = Side::off_axis);
KernelEval kernel_Kn(const FiniteSizeParams& params, double x, double y);
double hat_kernel(const FiniteSizeParams& params, double x, double y);
double verify_ode(const FiniteSizeParams& params, Complex z);
double verify_recurrence(const FiniteSizeParams& params, const MopIndex& index,
                         Complex z);

}  // namespace tricut
