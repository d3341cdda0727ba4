#include "tricut/spectral_curve.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace tricut {
namespace {

void validate_base(double a, double t) {
  if (!(a > 0) || !std::isfinite(a)) throw ConfigError("source strength a must be positive");
  if (!(t > 0) || !(t < 1)) throw ConfigError("weight fraction t must lie in (0, 1)");
}

// Curve polynomial in xi at fixed z, Horner form, and its xi-derivative.
Complex curve_f(const ModelParams& pr, Complex z, Complex xi) {
  return (((xi - z) * xi + (1.0 - pr.b)) * xi + pr.b * z) * xi - pr.t * pr.b;
}

Complex curve_fp(const ModelParams& pr, Complex z, Complex xi) {
  return ((4.0 * xi - 3.0 * z) * xi + 2.0 * (1.0 - pr.b)) * xi + pr.b * z;
}

double curve_f_real(const ModelParams& pr, double z, double x) {
  return (((x - z) * x + (1.0 - pr.b)) * x + pr.b * z) * x - pr.t * pr.b;
}

double curve_fp_real(const ModelParams& pr, double z, double x) {
  return ((4.0 * x - 3.0 * z) * x + 2.0 * (1.0 - pr.b)) * x + pr.b * z;
}

Complex polish_root(const ModelParams& pr, Complex z, Complex xi) {
  for (int it = 0; it < 3; ++it) {
    Complex fp = curve_fp(pr, z, xi);
    if (std::abs(fp) < 1e-300) break;
    xi -= curve_f(pr, z, xi) / fp;
  }
  return xi;
}

// All four roots of the curve at z via the companion matrix, Newton-polished.
// For exactly real z, roots that are real to within roundoff are snapped and
// re-polished in real arithmetic so off-cut sheet values come out exactly real.
std::array<Complex, 4> quartic_roots(const ModelParams& pr, Complex z) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(1, 0) = m(2, 1) = m(3, 2) = 1.0;
  m(0, 3) = Complex(pr.t * pr.b);
  m(1, 3) = -pr.b * z;
  m(2, 3) = Complex(-(1.0 - pr.b));
  m(3, 3) = z;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
  if (es.info() != Eigen::Success) throw EigenSolverFailure("companion eigenvalue solve failed");
  std::array<Complex, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = polish_root(pr, z, es.eigenvalues()(i));
  if (z.imag() == 0.0) {
    for (Complex& xi : out) {
      if (std::abs(xi.imag()) > 1e-11 * (1.0 + std::abs(xi))) continue;
      double x = xi.real();
      for (int it = 0; it < 2; ++it) {
        double fp = curve_fp_real(pr, z.real(), x);
        if (std::abs(fp) < 1e-300) break;
        x -= curve_f_real(pr, z.real(), x) / fp;
      }
      xi = Complex(x, 0.0);
    }
  }
  return out;
}

double min_separation(const std::array<Complex, 4>& v) {
  double s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) s = std::min(s, std::abs(v[i] - v[j]));
  return s;
}

struct Assignment {
  std::array<int, 4> perm{};  // new root perm[j] continues old label j
  double worst_move = 0;
};

Assignment best_assignment(const std::array<Complex, 4>& old_xi,
                           const std::array<Complex, 4>& new_xi) {
  std::array<int, 4> p = {0, 1, 2, 3};
  Assignment best;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0, worst = 0;
    for (int j = 0; j < 4; ++j) {
      double d = std::abs(new_xi[p[j]] - old_xi[j]);
      cost += d;
      worst = std::max(worst, d);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.perm = p;
      best.worst_move = worst;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Roots of the critical cubic y^3 - (1+2b) y^2 + (b^2 + (3t-1) b) y - t b^2
// by the trigonometric formula, ascending.
std::array<double, 3> critical_y(const ModelParams& pr) {
  if (!(pr.b > 3)) throw PhaseError("support splits into three cuts only for a^2 > 3");
  const double c2 = -(1.0 + 2.0 * pr.b);
  const double c1 = pr.b * pr.b + (3.0 * pr.t - 1.0) * pr.b;
  const double c0 = -pr.t * pr.b * pr.b;
  const double P = c1 - c2 * c2 / 3.0;
  const double Q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  if (!(P < 0) || !(4.0 * P * P * P + 27.0 * Q * Q < 0))
    throw PhaseError("critical cubic does not have three distinct real roots");
  const double mcoef = 2.0 * std::sqrt(-P / 3.0);
  const double arg = std::clamp(3.0 * Q / (P * mcoef), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  std::array<double, 3> y;
  for (int k = 0; k < 3; ++k)
    y[k] = mcoef * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - c2 / 3.0;
  std::sort(y.begin(), y.end());
  if (!(y[0] > 0)) throw OrderingViolation("critical cubic produced a non-positive root");
  return y;
}

double z_of_xi_real(const ModelParams& pr, double x) {
  return (((x * x) + (1.0 - pr.b)) * x * x - pr.t * pr.b) / ((x * x - pr.b) * x);
}

struct CutLayout {
  double z1, z2, z3;
};

CutLayout cut_layout(const ModelParams& pr) {
  const std::array<double, 3> y = critical_y(pr);
  CutLayout c{z_of_xi_real(pr, std::sqrt(y[0])), z_of_xi_real(pr, std::sqrt(y[1])),
              z_of_xi_real(pr, std::sqrt(y[2]))};
  if (!(0 < c.z1 && c.z1 < c.z2 && c.z2 < c.z3))
    throw OrderingViolation("branch points failed 0 < z1 < z2 < z3");
  return c;
}

Complex anchor_point(const ModelParams& pr) { return Complex(10.0 * (1.0 + pr.a), 0.0); }

// Large-z sheet asymptotes, the labeling authority at the anchor.
std::array<Complex, 4> sheet_asymptotes(const ModelParams& pr, Complex z) {
  return {z - 1.0 / z, pr.a + pr.t1 / z, pr.t / z, -pr.a + pr.t3 / z};
}

}  // namespace

ModelParams ModelParams::general(double a, double t) {
  validate_base(a, t);
  ModelParams pr;
  pr.a = a;
  pr.t = t;
  pr.b = a * a;
  pr.t1 = pr.t3 = (1.0 - t) / 2.0;
  return pr;
}

ModelParams ModelParams::three_cut(double a, double t) {
  ModelParams pr = general(a, t);
  if (!(pr.b > 3)) throw PhaseError("three-cut regime requires a^2 > 3");
  return pr;
}

Complex evaluate_z_of_xi(const ModelParams& params, Complex xi) {
  const double tol = 1e-14 * std::max(1.0, params.a);
  for (double pole : {0.0, params.a, -params.a}) {
    if (std::abs(xi - pole) <= tol) {
      std::ostringstream os;
      os << "xi within " << tol << " of the pole " << pole;
      throw PoleAtXi(os.str());
    }
  }
  return ((xi * xi + (1.0 - params.b)) * xi * xi - params.t * params.b) /
         ((xi * xi - params.b) * xi);
}

SupportData critical_points(const ModelParams& params) {
  SupportData s;
  s.y_roots = critical_y(params);
  s.p = std::sqrt(s.y_roots[0]);
  s.q = std::sqrt(s.y_roots[1]);
  s.r = std::sqrt(s.y_roots[2]);
  return s;
}

SupportData branch_points(const ModelParams& params) {
  SupportData s = critical_points(params);
  const CutLayout c = cut_layout(params);
  s.z1 = c.z1;
  s.z2 = c.z2;
  s.z3 = c.z3;
  const double ep = detail::edge_constant_from_curvature(params, s.p);
  const double eq = detail::edge_constant_from_curvature(params, s.q);
  const double er = detail::edge_constant_from_curvature(params, s.r);
  s.rho_edge = {{s.z1, ep}, {-s.z1, ep}, {s.z2, eq}, {-s.z2, eq}, {s.z3, er}, {-s.z3, er}};
  return s;
}

double edge_constant(const SupportData& support, double edge) {
  for (const auto& [key, value] : support.rho_edge)
    if (std::abs(key - edge) <= 1e-9 * (1.0 + std::abs(edge))) return value;
  throw ConfigError("no edge constant stored near the requested point");
}

PhaseReport discriminants(const ModelParams& params) {
  const double b = params.b, t = params.t;
  PhaseReport rep;
  rep.delta_c = 108.0 * b * t * t + (-9.0 * b * b - 90.0 * b - 9.0) * t +
                8.0 * b * b * b - 15.0 * b * b + 6.0 * b + 1.0;
  rep.delta = (1.0 - t) * b * b * rep.delta_c;
  const double f = 5.0 * b + 1.0;
  rep.delta_q = -3.0 * (b - 3.0) * f * f * f;
  if (std::abs(b - 3.0) <= 1e-12)
    rep.phase = PhaseReport::Phase::Boundary;
  else if (b > 3.0)
    rep.phase = PhaseReport::Phase::ThreeCut;
  else
    rep.phase = PhaseReport::Phase::Unsupported;
  return rep;
}

PhaseReport classify_phase(const ModelParams& params) { return discriminants(params); }

namespace detail {

double edge_constant_from_curvature(const ModelParams& params, double xi_c) {
  const double b = params.b, t = params.t, x = xi_c;
  const double N = x * x * x * x + (1.0 - b) * x * x - t * b;
  const double Np = 4.0 * x * x * x + 2.0 * (1.0 - b) * x;
  const double Npp = 12.0 * x * x + 2.0 * (1.0 - b);
  const double D = (x * x - b) * x;
  const double Dp = 3.0 * x * x - b;
  const double Dpp = 6.0 * x;
  const double zpp =
      (Npp * D * D - N * Dpp * D - 2.0 * Np * Dp * D + 2.0 * N * Dp * Dp) / (D * D * D);
  if (std::abs(zpp) < 1e-10) throw DegenerateEdge("vanishing curvature at a support endpoint");
  return std::sqrt(2.0 / std::abs(zpp));
}

}  // namespace detail

SheetTracker::SheetTracker(const ModelParams& params) : params_(params) {
  const CutLayout c = cut_layout(params_);
  z1_ = c.z1;
  z2_ = c.z2;
  z3_ = c.z3;
  anchor_ = anchor_point(params_);
  const std::array<Complex, 4> roots = quartic_roots(params_, anchor_);
  const std::array<Complex, 4> asym = sheet_asymptotes(params_, anchor_);
  const Assignment as = best_assignment(asym, roots);
  for (int j = 0; j < 4; ++j) anchor_xi_[j] = roots[as.perm[j]];
  z_ = anchor_;
  xi_ = anchor_xi_;
}

void SheetTracker::reset() {
  z_ = anchor_;
  xi_ = anchor_xi_;
}

const std::array<Complex, 4>& SheetTracker::advance_to(Complex z) {
  return advance_along(z, true);
}

const std::array<Complex, 4>& SheetTracker::advance_along(Complex target, bool may_perturb) {
  const Complex start = z_;
  const std::array<Complex, 4> start_xi = xi_;

  const double ya = start.imag(), yb = target.imag();
  if ((ya > 0 && yb < 0) || (ya < 0 && yb > 0)) {
    const double xc = start.real() + (target.real() - start.real()) * (-ya) / (yb - ya);
    const double m = 1e-12 * (1.0 + z3_);
    const bool on_cut = (xc >= -z3_ - m && xc <= -z2_ + m) || (std::abs(xc) <= z1_ + m) ||
                        (xc >= z2_ - m && xc <= z3_ + m);
    if (on_cut) throw PathCrossesCut("segment crosses the support transversally");
  }

  const Complex dir = target - start;
  const double length = std::abs(dir);
  if (length == 0.0) return xi_;
  const Complex u = dir / length;
  const double floor = std::max(1e-13, 1e-10 * length);

  double pos = 0.0, step = length;
  bool collided = false;
  for (long iter = 0; pos < length; ++iter) {
    if (iter > 200000) throw ContinuationFailure("step budget exhausted along segment");
    const double s = std::min(step, length - pos);
    const Complex znext = (length - (pos + s) < floor) ? target : start + u * (pos + s);
    const std::array<Complex, 4> roots = quartic_roots(params_, znext);
    const Assignment as = best_assignment(xi_, roots);
    const double sep_old = min_separation(xi_);
    if (as.worst_move > 0.45 * sep_old && s > floor) {
      step = s / 2.0;
      continue;
    }
    std::array<Complex, 4> matched;
    for (int j = 0; j < 4; ++j) matched[j] = roots[as.perm[j]];
    if (min_separation(matched) < 1e-8) {
      if (s > floor) {
        step = s / 2.0;
        continue;
      }
      collided = true;
      break;
    }
    xi_ = matched;
    z_ = znext;
    pos = (znext == target) ? length : pos + s;
    step = 2.0 * s;
  }
  if (!collided) return xi_;

  if (!may_perturb) {
    z_ = start;
    xi_ = start_xi;
    throw ContinuationFailure("tracked roots collided within 1e-8");
  }
  // one upward perturbation of the whole segment, then give up
  z_ = start;
  xi_ = start_xi;
  const Complex lift(0.0, 1e-6 * (1.0 + params_.a));
  advance_along(start + lift, false);
  advance_along(target + lift, false);
  return advance_along(target, false);
}

SheetValues solve_sheets(const ModelParams& params, Complex z, Side side) {
  if (!(params.b > 3)) throw PhaseError("sheet labels are defined in the three-cut regime");

  if (z.imag() < 0) {
    SheetValues up = solve_sheets(params, std::conj(z), Side::off_axis);
    SheetValues out;
    out.z = z;
    out.side = Side::off_axis;
    for (int j = 0; j < 4; ++j) out.xi[j] = std::conj(up.xi[j]);
    return out;
  }

  // From the anchor radius outward the sheets are pinned by their own
  // asymptotes, the same authority that labels the tracker anchor; label the
  // roots directly instead of continuing across an arbitrarily long segment.
  if (std::abs(z) >= std::abs(anchor_point(params))) {
    const std::array<Complex, 4> roots = quartic_roots(params, z);
    const Assignment as = best_assignment(sheet_asymptotes(params, z), roots);
    SheetValues out;
    out.z = z;
    out.side = Side::off_axis;
    for (int j = 0; j < 4; ++j) out.xi[j] = roots[as.perm[j]];
    return out;
  }

  const CutLayout c = cut_layout(params);
  const double x = z.real(), y = z.imag();
  const double m = 1e-12 * (1.0 + c.z3);
  const bool on_cut = y == 0.0 && ((x >= -c.z3 - m && x <= -c.z2 + m) ||
                                   (std::abs(x) <= c.z1 + m) || (x >= c.z2 - m && x <= c.z3 + m));
  if (!on_cut && side != Side::off_axis) side = Side::off_axis;
  if (on_cut && side == Side::off_axis)
    throw ConfigError("a boundary side is required on the support");

  SheetTracker tr(params);
  const double h = std::max(y, 1e-6 * (1.0 + params.a));
  tr.advance_to(Complex(tr.where().real(), h));
  tr.advance_to(Complex(x, h));

  SheetValues out;
  out.z = z;
  out.side = side;
  if (!on_cut) {
    tr.advance_to(z);
    out.xi = tr.values();
    return out;
  }

  // boundary value from above by one Richardson step in the offset
  const double eps = 1e-9 * (1.0 + c.z3);
  tr.advance_to(Complex(x, 2.0 * eps));
  const std::array<Complex, 4> v2 = tr.values();
  tr.advance_to(Complex(x, eps));
  const std::array<Complex, 4> v1 = tr.values();
  for (int j = 0; j < 4; ++j) {
    out.xi[j] = 2.0 * v1[j] - v2[j];
    if (side == Side::below) out.xi[j] = std::conj(out.xi[j]);
  }
  return out;
}

}  // namespace tricut
