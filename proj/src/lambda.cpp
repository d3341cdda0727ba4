#include "tricut/lambda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tricut/density.hpp"
#include "tricut/quadrature.hpp"

namespace tricut {
namespace {

constexpr int kPanelOrder = 24;

struct PathNode {
  Complex z;
  Complex weight;  // Gauss weight times dz/du
};

// lambda_j(conj z) = conj(lambda_j(z)) + c_j; c_j is fixed by the constant
// imaginary part each lambda carries on its real ray
std::array<Complex, 4> reflection_constants(const ModelParams& pr) {
  const Complex jpi(0.0, std::numbers::pi);
  return {Complex(0.0), Complex(0.0), -(1.0 - pr.t) * jpi, -(1.0 + pr.t) * jpi};
}

// one Gauss panel of a parametrized leg u -> (z(u), dz/du) over [u0, u1]
template <class Map>
void emit_panel(double u0, double u1, int split, Map&& map, std::vector<PathNode>& nodes) {
  const GaussRule& rule = gauss_rule(kPanelOrder);
  for (int part = 0; part < split; ++part) {
    const double a = u0 + (u1 - u0) * part / split;
    const double b = u0 + (u1 - u0) * (part + 1) / split;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      const auto [z, dz] = map(mid + half * rule.x[k]);
      nodes.push_back({z, rule.w[k] * half * dz});
    }
  }
}

std::array<double, 6> branch_abscissas(const SupportData& s) {
  return {s.z1, -s.z1, s.z2, -s.z2, s.z3, -s.z3};
}

double nearest_branch(const SupportData& s, Complex z, double exclude = 1e300) {
  double d = 1e300;
  for (double bp : branch_abscissas(s))
    if (std::abs(bp - exclude) > 1e-9) d = std::min(d, std::abs(z - bp));
  return d;
}

// vertical leg between the axis point x and x + iH, parametrized y = H s^2 so
// a square-root branch-point departure becomes analytic in s
void build_vertical_sq(const SupportData& s, double x, double H, bool ascending, int split,
                       std::vector<PathNode>& nodes) {
  const double d = nearest_branch(s, Complex(x, 0.0), x);
  const double d_here = nearest_branch(s, Complex(x, 0.0));
  const double d_eff = (d_here < 1e-9) ? d : d_here;
  const double s_rad = std::sqrt(std::max(d_eff, 1e-12) / H);

  std::vector<double> bounds{0.0};
  if (s_rad < 2.0) {
    double v = std::clamp(s_rad / 2.0, 1e-4, 0.5);
    while (v < 1.0) {
      bounds.push_back(v);
      v *= 2.0;
    }
  }
  bounds.push_back(1.0);

  const auto up = [&](double u) {
    return std::pair{Complex(x, H * u * u), Complex(0.0, 2.0 * H * u)};
  };
  const auto down = [&](double u) {
    const double t = 1.0 - u;
    return std::pair{Complex(x, H * t * t), Complex(0.0, -2.0 * H * t)};
  };
  if (ascending) {
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
      emit_panel(bounds[k], bounds[k + 1], split, up, nodes);
  } else {
    for (std::size_t k = bounds.size() - 1; k > 0; --k)
      emit_panel(1.0 - bounds[k], 1.0 - bounds[k - 1], split, down, nodes);
  }
}

// horizontal leg at height H, panel length graded by branch-point distance
void build_horizontal(const SupportData& s, double xa, double xb, double H, int split,
                      std::vector<PathNode>& nodes) {
  const double close_tol = 1e-13 * (1.0 + std::abs(xa) + std::abs(xb));
  if (std::abs(xb - xa) < close_tol) return;
  const double dirn = (xb > xa) ? 1.0 : -1.0;
  const auto map = [&](double u) { return std::pair{Complex(u, H), Complex(1.0)}; };
  double x = xa;
  while (std::abs(xb - x) > close_tol) {
    const double d = nearest_branch(s, Complex(x, H));
    const double step = std::clamp(0.6 * d, 2.0 * H, 1.2);
    if (step >= std::abs(xb - x)) {
      emit_panel(x, xb, split, map, nodes);
      break;
    }
    emit_panel(x, x + dirn * step, split, map, nodes);
    x += dirn * step;
  }
}

// vertical descent (or ascent) between heights y0 and y1 > 0 at abscissa x
void build_vertical_plain(const SupportData& s, double x, double y0, double y1, int split,
                          std::vector<PathNode>& nodes) {
  const double lo = std::min(y0, y1), hi = std::max(y0, y1);
  if (hi - lo < 1e-15) return;
  const double d_ax = nearest_branch(s, Complex(x, 0.0));

  std::vector<double> bounds{hi};  // descending
  double y = hi;
  const double floor_scale = std::max({lo, d_ax, 1e-12});
  while (y - lo > 1.2 * floor_scale) {
    y = lo + (y - lo) / 2.0;
    bounds.push_back(y);
  }
  bounds.push_back(lo);

  const bool descending = y0 > y1;
  const auto map = [&](double u) { return std::pair{Complex(x, u), Complex(0.0, 1.0)}; };
  if (descending) {
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
      emit_panel(bounds[k], bounds[k + 1], split, map, nodes);
  } else {
    for (std::size_t k = bounds.size() - 1; k > 0; --k)
      emit_panel(bounds[k], bounds[k - 1], split, map, nodes);
  }
}

// straight leg to a far or elevated target, graded by branch-point distance
void build_straight(const SupportData& s, Complex from, Complex to, double H, int split,
                    std::vector<PathNode>& nodes) {
  const double len = std::abs(to - from);
  if (len < 1e-14) return;
  const Complex dir = to - from;
  const auto map = [&](double u) { return std::pair{from + u * dir, dir}; };
  double u = 0.0;
  while (u < 1.0) {
    const double d = nearest_branch(s, from + u * dir);
    const double step_u = std::clamp(0.6 * d, 2.0 * H, 80.0) / len;
    if (step_u >= 1.0 - u) {
      emit_panel(u, 1.0, split, map, nodes);
      break;
    }
    emit_panel(u, u + step_u, split, map, nodes);
    u += step_u;
  }
}

}  // namespace

LambdaEvaluator::LambdaEvaluator(const ModelParams& params, LambdaOptions options)
    : pr_(params),
      s_(branch_points(params)),
      elevation_(1e-3 * (1.0 + branch_points(params).z3) * options.elevation_scale),
      split_(std::max(1, options.panel_split)) {
  lam1p_z1_ = path_integrals(s_.z3, Complex(s_.z1, 0.0))[0];
  lam1p_mz2_ = path_integrals(s_.z3, Complex(-s_.z2, 0.0))[0];
}

std::array<Complex, 4> LambdaEvaluator::path_integrals(double anchor_x, Complex target) const {
  const double H = elevation_;
  const double X = target.real(), Y = target.imag();
  std::array<Complex, 4> acc{};
  if (std::abs(X - anchor_x) < 1e-14 && Y < 1e-14) return acc;

  std::vector<PathNode> nodes;
  nodes.reserve(4096);
  build_vertical_sq(s_, anchor_x, H, true, split_, nodes);

  const double limx = s_.z3 + 1.0;
  if (Y >= H || std::abs(X) > limx) {
    const double hb = std::clamp(X, -limx, limx);
    build_horizontal(s_, anchor_x, hb, H, split_, nodes);
    build_straight(s_, Complex(hb, H), target, H, split_, nodes);
  } else {
    build_horizontal(s_, anchor_x, X, H, split_, nodes);
    if (Y == 0.0)
      build_vertical_sq(s_, X, H, false, split_, nodes);
    else
      build_vertical_plain(s_, X, H, Y, split_, nodes);
  }

  SheetTracker tr(pr_);
  tr.advance_to(Complex(tr.where().real(), H));
  tr.advance_to(Complex(anchor_x, H));
  for (const PathNode& nd : nodes) {
    tr.advance_to(nd.z);
    const std::array<Complex, 4>& xi = tr.values();
    for (int j = 0; j < 4; ++j) acc[j] += nd.weight * xi[j];
  }
  return acc;
}

double LambdaEvaluator::ray_end(int sheet) const {
  switch (sheet) {
    case 1:
    case 2:
      return s_.z3;
    case 3:
      return s_.z1;
    default:
      return -s_.z2;
  }
}

Complex LambdaEvaluator::lambda(Complex z, int sheet, Side side) const {
  if (sheet < 1 || sheet > 4) throw ConfigError("sheet index must be 1..4");
  const std::array<Complex, 4> refc = reflection_constants(pr_);
  if (z.imag() < 0)
    return std::conj(lambda(std::conj(z), sheet, Side::off_axis)) + refc[sheet - 1];
  if (z.imag() == 0.0 && z.real() <= ray_end(sheet) + 1e-9 * (1.0 + s_.z3)) {
    if (side == Side::below)
      return std::conj(lambda(z, sheet, Side::above)) + refc[sheet - 1];
    if (side == Side::off_axis)
      throw ConfigError("a boundary side is required on the jump ray");
  }
  switch (sheet) {
    case 1:
      return path_integrals(s_.z3, z)[0];
    case 2:
      return path_integrals(s_.z3, z)[1];
    case 3:
      return lam1p_z1_ + path_integrals(s_.z1, z)[2];
    default:
      return lam1p_mz2_ + path_integrals(-s_.z2, z)[3];
  }
}

std::array<Complex, 4> LambdaEvaluator::above_values(Complex z) const {
  const std::array<Complex, 4> r12 = path_integrals(s_.z3, z);
  return {r12[0], r12[1], lam1p_z1_ + path_integrals(s_.z1, z)[2],
          lam1p_mz2_ + path_integrals(-s_.z2, z)[3]};
}

std::array<Complex, 4> LambdaEvaluator::lambda_all(Complex z, Side side) const {
  const std::array<Complex, 4> refc = reflection_constants(pr_);
  if (z.imag() < 0) {
    const std::array<Complex, 4> up = lambda_all(std::conj(z), Side::off_axis);
    std::array<Complex, 4> out;
    for (int j = 0; j < 4; ++j) out[j] = std::conj(up[j]) + refc[j];
    return out;
  }
  if (z.imag() == 0.0 && z.real() <= s_.z3 + 1e-9 * (1.0 + s_.z3)) {
    if (side == Side::off_axis)
      throw ConfigError("a boundary side is required on the jump rays");
    if (side == Side::below) {
      const std::array<Complex, 4> up = above_values(z);
      std::array<Complex, 4> out;
      for (int j = 0; j < 4; ++j) out[j] = std::conj(up[j]) + refc[j];
      return out;
    }
  }
  return above_values(z);
}

LambdaValues LambdaEvaluator::values_at(Complex z, Side side) const {
  return {z, lambda_all(z, side), l_constants(), side};
}

const std::array<Complex, 4>& LambdaEvaluator::l_constants() const {
  std::call_once(l_once_, [&] {
    const double R = 1e3;
    const double lnR = std::log(R);
    const std::array<Complex, 4> r12 = path_integrals(s_.z3, Complex(R, 0.0));
    l_[0] = r12[0] - (R * R / 2.0 - lnR);
    l_[1] = r12[1] - (pr_.a * R + pr_.t1 * lnR);
    l_[2] = lam1p_z1_ + path_integrals(s_.z1, Complex(R, 0.0))[2] - pr_.t * lnR;
    l_[3] = lam1p_mz2_ + path_integrals(-s_.z2, Complex(R, 0.0))[3] + pr_.a * R -
            pr_.t1 * lnR;
  });
  return l_;
}

double LambdaEvaluator::h_extended(double x) const {
  return -x * x / 4.0 + (path_integrals(s_.z3, Complex(x, 0.0))[0] - lam1p_z1_).real();
}

double LambdaEvaluator::h(double x) const {
  if (!in_support(s_, x)) throw OutOfSupport("h is defined on the closed support");
  return h_extended(x);
}

JumpReport LambdaEvaluator::jump_report(int n_samples) const {
  if (n_samples < 1) throw ConfigError("need at least one sample per relation");
  const double pi = std::numbers::pi;
  const Complex jpi(0.0, pi);
  const Complex j_1t = (1.0 - pr_.t) * jpi;
  const Complex j_1pt = (1.0 + pr_.t) * jpi;
  const Complex j_2t = 2.0 * pr_.t * jpi;
  const std::array<Complex, 4> refc = reflection_constants(pr_);

  // sample interior points, nudged off any branch point toward the center
  const auto points = [&](double lo, double hi) {
    std::vector<double> xs;
    const double spacing = (hi - lo) / n_samples;
    const double thr = std::min(0.03, (hi - lo) / 10.0);
    for (int k = 0; k < n_samples; ++k) {
      double x = lo + (k + 0.5) * spacing;
      const double nudge = (x < 0.5 * (lo + hi)) ? spacing / 7.0 : -spacing / 7.0;
      for (int guard = 0; guard < 50 && nearest_branch(s_, Complex(x, 0.0)) < thr; ++guard)
        x += nudge;
      xs.push_back(x);
    }
    return xs;
  };

  JumpReport rep;
  const auto add = [&](std::string label, double lo, double hi, double res) {
    rep.relations.push_back({std::move(label), lo, hi, n_samples, res});
    rep.max_residual = std::max(rep.max_residual, res);
  };
  const auto a12 = [&](double x) { return path_integrals(s_.z3, Complex(x, 0.0)); };
  const auto a3 = [&](double x) {
    return lam1p_z1_ + path_integrals(s_.z1, Complex(x, 0.0))[2];
  };
  const auto a4 = [&](double x) {
    return lam1p_mz2_ + path_integrals(-s_.z2, Complex(x, 0.0))[3];
  };

  {
    double res = 0;
    for (double x : points(s_.z2, s_.z3)) {
      const std::array<Complex, 4> v = a12(x);
      res = std::max({res, std::abs(v[0] - std::conj(v[1])), std::abs(std::conj(v[0]) - v[1])});
    }
    add("lambda1+ = lambda2-, lambda1- = lambda2+", s_.z2, s_.z3, res);
  }
  {
    double res = 0;
    const double lo = -s_.z3 - 2.0;
    for (double x : points(lo, s_.z2)) {
      const Complex a2v = a12(x)[1];
      res = std::max(res, std::abs(a2v - std::conj(a2v) - j_1t));
    }
    add("lambda2+ - lambda2- = (1-t) pi i", lo, s_.z2, res);
  }
  {
    double res = 0;
    for (double x : points(s_.z1, s_.z2)) {
      const Complex a1v = a12(x)[0];
      res = std::max(res, std::abs(a1v - std::conj(a1v) + j_1t));
    }
    add("lambda1+ - lambda1- = -(1-t) pi i", s_.z1, s_.z2, res);
  }
  {
    double res = 0;
    for (double x : points(-s_.z1, s_.z1)) {
      const Complex a1v = a12(x)[0], a3v = a3(x);
      const Complex b3 = std::conj(a3v) + refc[2];
      res = std::max({res, std::abs(a1v - b3), std::abs(std::conj(a1v) - a3v - j_1t)});
    }
    add("lambda1+ = lambda3-, lambda1- - lambda3+ = (1-t) pi i", -s_.z1, s_.z1, res);
  }
  {
    double res = 0;
    for (double x : points(-s_.z2, -s_.z1)) {
      const Complex a1v = a12(x)[0], a3v = a3(x);
      res = std::max({res, std::abs(a1v - std::conj(a1v) + j_1pt),
                      std::abs(a3v - (std::conj(a3v) + refc[2]) - j_2t)});
    }
    add("lambda1+ - lambda1- = -(1+t) pi i, lambda3+ - lambda3- = 2t pi i", -s_.z2, -s_.z1,
        res);
  }
  {
    double res = 0;
    for (double x : points(-s_.z3, -s_.z2)) {
      const Complex a1v = a12(x)[0], a4v = a4(x);
      const Complex b4 = std::conj(a4v) + refc[3];
      res = std::max({res, std::abs(a1v - b4), std::abs(std::conj(a1v) - a4v - j_1pt)});
    }
    add("lambda1+ = lambda4-, lambda1- - lambda4+ = (1+t) pi i", -s_.z3, -s_.z2, res);
  }
  {
    double res = 0;
    const double lo = -s_.z3 - 2.5;
    for (double x : points(lo, -s_.z3)) {
      const Complex a1v = a12(x)[0], a4v = a4(x);
      res = std::max({res, std::abs(a1v - std::conj(a1v) + 2.0 * jpi),
                      std::abs(a4v - (std::conj(a4v) + refc[3]) - j_1t)});
    }
    add("lambda1+ - lambda1- = -2 pi i, lambda4+ - lambda4- = (1-t) pi i", lo, -s_.z3, res);
  }
  return rep;
}

LemmaReport LambdaEvaluator::lemma_report(int interval, double offset) const {
  if (interval < 1 || interval > 3) throw ConfigError("interval index must be 1..3");
  if (!(offset > 0) || offset > 0.05 * (s_.z3 - s_.z2))
    throw ConfigError("offset must lie in (0, 0.05 (z3 - z2)]");

  double lo = 0, hi = 0;
  int expected = 0;
  switch (interval) {
    case 1: lo = -s_.z3; hi = -s_.z2; expected = 4; break;
    case 2: lo = -s_.z1; hi = s_.z1; expected = 3; break;
    default: lo = s_.z2; hi = s_.z3; expected = 2; break;
  }

  LemmaReport rep;
  rep.interval = interval;
  rep.expected_sheet = expected;
  rep.offset = offset;
  const int n = 20;
  rep.samples = 2 * n;
  rep.min_margin = 1e300;
  for (int k = 0; k < n; ++k) {
    const double x = lo + (hi - lo) * (k + 0.5) / n;
    const std::array<Complex, 4> v = above_values(Complex(x, offset));
    double best_other = -1e300;
    for (int j = 0; j < 4; ++j)
      if (j != expected - 1) best_other = std::max(best_other, v[j].real());
    const double margin = v[expected - 1].real() - best_other;
    rep.min_margin = std::min(rep.min_margin, margin);
    // the reflection constants are imaginary, so the mirrored point below the
    // axis carries the same real parts and the same margin
    for (double sgn : {1.0, -1.0})
      if (margin <= 0) rep.violations.push_back({Complex(x, sgn * offset), margin});
  }
  return rep;
}

Complex lambda(const ModelParams& params, const SupportData&, Complex z, int sheet,
               Side side) {
  return LambdaEvaluator(params).lambda(z, sheet, side);
}

std::array<Complex, 4> integration_constants(const ModelParams& params, const SupportData&) {
  return LambdaEvaluator(params).l_constants();
}

JumpReport check_jump_relations(const ModelParams& params, const SupportData&, int n_samples) {
  return LambdaEvaluator(params).jump_report(n_samples);
}

LemmaReport check_lemma_ordering(const ModelParams& params, const SupportData&, int interval,
                                 double offset) {
  return LambdaEvaluator(params).lemma_report(interval, offset);
}

double h_function(const ModelParams& params, const SupportData&, double x) {
  return LambdaEvaluator(params).h(x);
}

}  // namespace tricut
