#pragma once

// Shared implementation of the finite-n engine.  One translation unit
// instantiates the double evaluation profile, the other the 80-digit one.
// The orthogonality solves always run in the 80-digit scalar regardless of
// profile: the moment systems reach condition ~1e19 by n = 24 and ~1e40 by
// n = 48, so a double solve returns noise while the extended headroom
// absorbs the loss with ~40 digits to spare.  Evaluation is where the
// profiles differ: the double profile has a complex-plane base function and
// covers n <= 12; the extended profile keeps to real arguments and the
// exterior expansion, which is all the large-n kernel work needs.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include "tricut/detail/dawson.hpp"
#include "tricut/errors.hpp"
#include "tricut/finite.hpp"
#include "tricut/special.hpp"

namespace tricut::detail {

using Ext = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<80>>;
using ExtComplex = boost::multiprecision::cpp_complex<80>;

inline const Ext& ext_pi() {
  static const Ext v = acos(Ext(-1));
  return v;
}

// One solved orthogonality system: monic coefficients plus the surviving
// moments h^{(j)} (slot j at order k_j) and q^{(j)} (one order above).
struct FamilySol {
  MopIndex index;
  std::vector<Ext> coeffs;  // ascending, coeffs[degree] == 1
  std::array<Ext, 3> norms{};
  std::array<Ext, 3> q_norms{};
  Ext condition{1};
};

// Moment bookkeeping and orthogonality solves, all in the 80-digit scalar.
// Reduced moments keep every quantity polynomially sized: with
// mu_k = sqrt(2 pi / N) B_k the recursion is B_0 = 1, B_1 = a_j,
// B_k = a_j B_{k-1} + ((k-1)/N) B_{k-2}, and the full moment of
// omega_j(x) = exp(-N (x^2/2 - a_j x)) is exp(N a_j^2 / 2) mu_k.  The
// exp factor cancels row-wise in the orthogonality system, so the solve
// never sees it.  Callers hold the owning core's lock.
class FamilyWorkshop {
 public:
  explicit FamilyWorkshop(const FiniteSizeParams& p) : p_(p) {
    sqrt_norm_ = sqrt(2 * ext_pi() / p.N);
    for (int j = 0; j < 3; ++j) {
      source_[j] = source(p, j);
      log_prefactor_[j] = Ext(p.N) * source_[j] * source_[j] / 2;
      prefactor_[j] = exp(log_prefactor_[j]);
      b_[j] = {Ext(1), source_[j]};
    }
  }

  static Ext source(const FiniteSizeParams& p, int j) {
    return j == 0 ? Ext(p.a) : (j == 1 ? Ext(0) : Ext(-p.a));
  }

  Ext mu(int j, int k) {
    auto& b = b_[j];
    while (static_cast<int>(b.size()) <= k) {
      const int m = static_cast<int>(b.size());
      b.push_back(source_[j] * b[m - 1] + (Ext(m - 1) / p_.N) * b[m - 2]);
    }
    return sqrt_norm_ * b[k];
  }

  const Ext& prefactor(int j) const { return prefactor_[j]; }

  MomentValue moment_value(int j, int k) {
    const Ext m = mu(j, k);
    MomentValue out;
    if (m == 0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      return out;
    }
    out.sign = m > 0 ? 1 : -1;
    const Ext la = log(abs(m)) + log_prefactor_[j];
    out.log_abs = static_cast<double>(la);
    out.value = out.log_abs > 709.0
                    ? out.sign * std::numeric_limits<double>::infinity()
                    : static_cast<double>(prefactor_[j] * m);
    return out;
  }

  const FamilySol& family(const MopIndex& idx) {
    if (idx.k1 < 0 || idx.k2 < 0 || idx.k3 < 0)
      throw ConfigError("family index entries must be nonnegative");
    const std::array<int, 3> key{idx.k1, idx.k2, idx.k3};
    if (auto it = sols_.find(key); it != sols_.end()) return *it->second;

    const int deg = idx.degree();
    auto sol = std::make_unique<FamilySol>();
    sol->index = idx;
    sol->coeffs.assign(deg + 1, Ext(0));
    sol->coeffs[deg] = 1;
    if (deg > 0) {
      Eigen::Matrix<Ext, Eigen::Dynamic, Eigen::Dynamic> sys(deg, deg);
      Eigen::Matrix<Ext, Eigen::Dynamic, 1> rhs(deg);
      const std::array<int, 3> kk{idx.k1, idx.k2, idx.k3};
      int row = 0;
      for (int j = 0; j < 3; ++j)
        for (int m = 0; m < kk[j]; ++m, ++row) {
          for (int i = 0; i < deg; ++i) sys(row, i) = mu(j, i + m);
          rhs(row) = -mu(j, deg + m);
        }
      Eigen::PartialPivLU<Eigen::Matrix<Ext, Eigen::Dynamic, Eigen::Dynamic>>
          lu(sys);
      Ext dmax(0), dmin = std::numeric_limits<Ext>::infinity();
      for (int i = 0; i < deg; ++i) {
        const Ext d = abs(lu.matrixLU()(i, i));
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
      }
      if (!(dmin > 0))
        throw IllConditioned("orthogonality system is numerically singular");
      sol->condition = dmax / dmin;
      if (sol->condition * std::numeric_limits<Ext>::epsilon() > 1e-6)
        throw IllConditioned(
            "orthogonality system condition " +
            std::to_string(static_cast<double>(sol->condition)) +
            " exceeds the precision budget");
      const Eigen::Matrix<Ext, Eigen::Dynamic, 1> c = lu.solve(rhs);
      for (int i = 0; i < deg; ++i) sol->coeffs[i] = c(i);
    }
    const std::array<int, 3> kk{idx.k1, idx.k2, idx.k3};
    for (int j = 0; j < 3; ++j) {
      Ext h(0), q(0);
      for (int i = 0; i <= deg; ++i) {
        h += sol->coeffs[i] * mu(j, i + kk[j]);
        q += sol->coeffs[i] * mu(j, i + kk[j] + 1);
      }
      sol->norms[j] = prefactor_[j] * h;
      sol->q_norms[j] = prefactor_[j] * q;
    }
    return *sols_.emplace(key, std::move(sol)).first->second;
  }

 private:
  FiniteSizeParams p_;
  Ext sqrt_norm_;
  std::array<Ext, 3> source_, prefactor_, log_prefactor_;
  std::array<std::vector<Ext>, 3> b_;
  std::map<std::array<int, 3>, std::unique_ptr<FamilySol>> sols_;
};

struct KernelOut {
  double kn = 0;
  double hat_kn = 0;
};

// w(z) = sum_k (iz)^k / Gamma(k/2 + 1) on the upper half plane, summed in
// the 80-digit scalar.  The series cancels like exp(|z|^2); the realized
// loss is measured from the accumulated magnitudes and returned with the
// value, and arguments past the point where 80 digits cannot win are cut
// off immediately.
inline std::pair<ExtComplex, double> ext_faddeeva_upper(ExtComplex z) {
  using std::abs;
  using std::sqrt;
  const Ext eps = std::numeric_limits<Ext>::epsilon();
  const Ext z2 = norm(z);
  if (z2 > 300) return {ExtComplex(Ext(1)), 1e300};
  const ExtComplex iz(-z.imag(), z.real());
  ExtComplex acc(Ext(0)), pw(Ext(1));
  Ext abs_sum(0);
  Ext ge(1), go = sqrt(ext_pi()) / 2;
  const int hump = static_cast<int>(2 * static_cast<double>(z2)) + 8;
  for (int k = 0; k < 4000; ++k) {
    if (k >= 2) {
      Ext& g = (k % 2 == 0) ? ge : go;
      g *= Ext(k) / 2;
    }
    const ExtComplex term = pw / ((k % 2 == 0) ? ge : go);
    acc += term;
    const Ext tmag = abs(term);
    abs_sum += tmag;
    pw *= iz;
    if (k > hump && tmag <= eps * abs_sum / 1000) break;
  }
  const Ext denom = abs(acc);
  const double rel =
      denom > 0 ? static_cast<double>(eps * abs_sum / denom) : 1e300;
  return {acc, rel};
}

struct DoubleTraits {
  using Real = double;
  using C = std::complex<double>;
  static std::pair<C, double> base_upper(C zeta) {
    return {faddeeva_w(zeta), 1e-13};
  }
};

struct ExtendedTraits {
  using Real = Ext;
  using C = ExtComplex;
  static std::pair<C, double> base_upper(C zeta) {
    return ext_faddeeva_upper(zeta);
  }
};

template <class Traits>
class FiniteCore {
 public:
  using Real = typename Traits::Real;
  using C = typename Traits::C;
  using Mat4 = Eigen::Matrix<C, 4, 4>;
  using Vec4 = Eigen::Matrix<C, 4, 1>;
  using Row4 = Eigen::Matrix<C, 1, 4>;

  explicit FiniteCore(const FiniteSizeParams& p)
      : p_(p), work_(p), switch_radius_(p.a + 2.5) {
    using std::acos;
    using std::pow;
    using std::sqrt;
    const Real pi = acos(Real(-1));
    two_pi_ = 2 * pi;
    root_pi_ = sqrt(pi);
    half_n_root_ = sqrt(Real(p.N) / 2);
    eps_ = std::numeric_limits<Real>::epsilon();
    zero_tol_ = pow(eps_, Real(2) / 3);
    for (int j = 0; j < 3; ++j) {
      a_[j] = from_ext(FamilyWorkshop::source(p, j));
      s_[j] = from_ext(work_.prefactor(j));
    }
  }

  MomentValue moment(int j, int k) const {
    const std::lock_guard<std::mutex> hold(lock_);
    return work_.moment_value(j, k);
  }

  MopFamily family(const MopIndex& idx) const {
    const std::lock_guard<std::mutex> hold(lock_);
    const FamilySol& sol = work_.family(idx);
    MopFamily out;
    out.index = idx;
    const int deg = idx.degree();
    out.coeffs.resize(deg + 1);
    for (int i = 0; i <= deg; ++i)
      out.coeffs(i) = static_cast<double>(sol.coeffs[i]);
    out.sub_leading = deg > 0 ? out.coeffs(deg - 1) : 0.0;
    for (int j = 0; j < 3; ++j) {
      out.norms[j] = static_cast<double>(sol.norms[j]);
      out.q_norms[j] = static_cast<double>(sol.q_norms[j]);
    }
    const std::array<int, 3> kk{idx.k1, idx.k2, idx.k3};
    for (int j = 0; j < 3; ++j) {
      if (kk[j] == 0) continue;
      const double h =
          static_cast<double>(work_.family(lowered(idx, j)).norms[j]);
      out.c_consts[j] = std::complex<double>(0, -2 * M_PI / h);
    }
    out.condition = static_cast<double>(sol.condition);
    return out;
  }

  C cauchy_value(const MopIndex& idx, int j, C z, Side side) const {
    const std::lock_guard<std::mutex> hold(lock_);
    return transform(fam_at(idx).coeffs, j, z, side, false).value;
  }

  C cauchy_coeffs(const std::vector<double>& coeffs, int j, C z,
                  Side side) const {
    const std::lock_guard<std::mutex> hold(lock_);
    std::vector<Real> c(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) c[i] = Real(coeffs[i]);
    return transform(c, j, z, side, false).value;
  }

  Mat4 y_matrix(C z, Side side, double* det_residual) const {
    const std::lock_guard<std::mutex> hold(lock_);
    const Mat4 y = y_at(ensemble_index(), z, side, nullptr);
    if (det_residual) {
      using std::abs;
      *det_residual = static_cast<double>(abs(y.determinant() - C(Real(1))));
    }
    return y;
  }

  KernelOut kernel(double x, double y, const double* h_diff) const {
    const std::lock_guard<std::mutex> hold(lock_);
    using std::abs;
    using std::exp;
    const MopIndex idx = ensemble_index();
    Real value;
    if (std::abs(x - y) < 1e-8) {
      const Real xm = Real(0.5) * (Real(x) + Real(y));
      const Mat4 ym = y_at(idx, C(xm), Side::above, nullptr);
      const Mat4 yd = ode_derivative(idx, C(xm), ym);
      const C s = C((row_weights(xm) * (adjugate(ym) * Vec4(yd.col(0))))(0));
      value = exp(-(Real(p_.N) * xm * xm) / 2) * s.imag() / two_pi_;
    } else {
      const Mat4 ya = y_at(idx, C(Real(x)), Side::above, nullptr);
      const Mat4 yb = y_at(idx, C(Real(y)), Side::above, nullptr);
      const C s =
          C((row_weights(Real(y)) * (adjugate(yb) * Vec4(ya.col(0))))(0));
      const Real pref =
          exp(-(Real(p_.N) * (Real(x) * Real(x) + Real(y) * Real(y))) / 4);
      value = pref * s.imag() / (two_pi_ * (Real(x) - Real(y)));
    }
    KernelOut out;
    out.kn = static_cast<double>(value);
    out.hat_kn = h_diff
                     ? static_cast<double>(exp(Real(p_.N) * Real(*h_diff)) * value)
                     : std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  double ode_residual(C z) const {
    const std::lock_guard<std::mutex> hold(lock_);
    const MopIndex idx = ensemble_index();
    Mat4 yd;
    const Mat4 y = y_at(idx, z, Side::off_axis, &yd);
    const Fam& top = fam_at(idx);
    const std::array<C, 4> dinv = dc_inverse(top);
    const std::array<C, 4> ecol = exp_column(z);
    const std::array<C, 4> shift{z, C(a_[0]), C(a_[1]), C(a_[2])};
    Mat4 psi, psid;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        psi(r, c) = dinv[r] * y(r, c) * ecol[c];
        psid(r, c) =
            dinv[r] * (yd(r, c) - C(Real(p_.N)) * y(r, c) * shift[c]) * ecol[c];
      }
    const Mat4 den = Mat4(ode_matrix(idx, z) * psi) * C(Real(p_.N));
    return static_cast<double>(frobenius(Mat4(psid - den)) / frobenius(den));
  }

  double recurrence_residual(const MopIndex& idx, C z) const {
    const std::lock_guard<std::mutex> hold(lock_);
    const MopIndex hi{idx.k1 + 1, idx.k2, idx.k3};
    const Mat4 plo = psi_at(idx, z);
    const Mat4 phi = psi_at(hi, z);
    Mat4 u = Mat4::Zero();
    u(0, 0) = z - C(a_[0]);
    u(0, 1) = C(-Real(idx.k1) / Real(p_.N));
    u(0, 2) = C(-Real(idx.k2) / Real(p_.N));
    u(0, 3) = C(-Real(idx.k3) / Real(p_.N));
    u(1, 0) = u(2, 0) = u(3, 0) = C(Real(1));
    u(2, 2) = C(a_[1] - a_[0]);
    u(3, 3) = C(a_[2] - a_[0]);
    const Mat4 den = u * plo;
    return static_cast<double>(frobenius(Mat4(phi - den)) / frobenius(den));
  }

 private:
  struct Fam {
    MopIndex index;
    std::vector<Real> coeffs;
    std::array<Real, 3> norms{};
    std::array<C, 3> c_consts{};  // -2 pi i / lowered norm; 0 when k_j == 0
  };

  struct Transform {
    C value{};
    C deriv{};
    double rel_err = 0;
  };

  MopIndex ensemble_index() const { return MopIndex{p_.n1, p_.n2, p_.n3}; }

  static MopIndex lowered(const MopIndex& idx, int j) {
    MopIndex out = idx;
    (j == 0 ? out.k1 : (j == 1 ? out.k2 : out.k3)) -= 1;
    return out;
  }

  static Real from_ext(const Ext& x) { return static_cast<Real>(x); }

  Real reduced_moment(int j, int k) const {
    auto& v = rmu_[j];
    while (static_cast<int>(v.size()) <= k)
      v.push_back(from_ext(work_.mu(j, static_cast<int>(v.size()))));
    return v[k];
  }

  const Fam& fam_at(const MopIndex& idx) const {
    const std::array<int, 3> key{idx.k1, idx.k2, idx.k3};
    if (auto it = fams_.find(key); it != fams_.end()) return *it->second;
    const FamilySol& sol = work_.family(idx);
    auto fam = std::make_unique<Fam>();
    fam->index = idx;
    fam->coeffs.resize(sol.coeffs.size());
    for (std::size_t i = 0; i < sol.coeffs.size(); ++i)
      fam->coeffs[i] = from_ext(sol.coeffs[i]);
    const std::array<int, 3> kk{idx.k1, idx.k2, idx.k3};
    for (int j = 0; j < 3; ++j) {
      using std::isfinite;
      fam->norms[j] = from_ext(sol.norms[j]);
      if (!isfinite(fam->norms[j]))
        throw Overflow("family norm exceeds the evaluation range");
      if (kk[j] == 0) continue;
      const Real h = from_ext(work_.family(lowered(idx, j)).norms[j]);
      if (!isfinite(h) || h == Real(0))
        throw Overflow("lowered family norm exceeds the evaluation range");
      fam->c_consts[j] = C(Real(0), -two_pi_ / h);
    }
    return *fams_.emplace(key, std::move(fam)).first->second;
  }

  // Base of the transform recursion: the cut integral of the Gaussian,
  // int exp(-t^2)/(t - zeta) dt = i pi w(zeta) for Im zeta > 0, continued
  // as -conj(w(conj zeta)) below the cut (not the entire w, which picks up
  // the jump).  On the axis both one-sided limits are exact closed forms.
  std::pair<C, double> base_value(C zeta, bool upper) const {
    using std::exp;
    if (zeta.imag() == Real(0)) {
      const Real x = zeta.real();
      const Real g = exp(-x * x);
      const Real d = (Real(2) / root_pi_) * dawson(x);
      return {C(upper ? g : -g, d), static_cast<double>(4 * eps_)};
    }
    if (zeta.imag() > Real(0)) return Traits::base_upper(zeta);
    const auto [w, rel] = Traits::base_upper(C(zeta.real(), -zeta.imag()));
    return {C(-w.real(), w.imag()), rel};
  }

  Transform forward(const std::vector<Real>& coeffs, int j, C z, bool upper,
                    bool want_deriv) const {
    using std::abs;
    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<C> jk(deg + 1), jkd(want_deriv ? deg + 1 : 0);
    std::vector<Real> err(deg + 1);
    const C zeta = (z - C(a_[j])) * half_n_root_;
    const auto [base, base_rel] = base_value(zeta, upper);
    jk[0] = base * (s_[j] / 2);
    err[0] = Real(base_rel) * abs(jk[0]);
    if (want_deriv) {
      const C based = C(Real(0), Real(2) / root_pi_) - (zeta + zeta) * base;
      jkd[0] = based * half_n_root_ * (s_[j] / 2);
    }
    const C inv_two_pi_i = C(Real(0), Real(-1) / two_pi_);
    const Real az = abs(z);
    for (int k = 1; k <= deg; ++k) {
      const Real m = s_[j] * reduced_moment(j, k - 1);
      jk[k] = inv_two_pi_i * m + z * jk[k - 1];
      if (want_deriv) jkd[k] = jk[k - 1] + z * jkd[k - 1];
      err[k] = az * err[k - 1] + eps_ * (abs(m) / two_pi_ + az * abs(jk[k - 1]));
    }
    Transform out;
    Real esum(0), asum(0);
    for (int k = 0; k <= deg; ++k) {
      out.value += C(coeffs[k]) * jk[k];
      if (want_deriv) out.deriv += C(coeffs[k]) * jkd[k];
      esum += abs(coeffs[k]) * err[k];
      asum += abs(coeffs[k]) * abs(jk[k]);
    }
    const Real denom = abs(out.value);
    out.rel_err = denom > Real(0)
                      ? static_cast<double>((esum + eps_ * asum) / denom)
                      : std::numeric_limits<double>::infinity();
    return out;
  }

  // Exterior expansion: C(P omega_j)(z) = (i / 2 pi) sum_m M_m z^{-m-1}
  // over the full moments M_m of P omega_j.  The series is asymptotic: the
  // term envelope decays until the moment growth a_j + sqrt((deg+m)/N)
  // catches |z| and grows after, so summation stops at that turnaround.
  // The moments oscillate under the envelope, so the truncation estimate is
  // the largest of the last few accepted terms, never a single atypical
  // low; the rounding of the sum and (on the axis) the boundary jump the
  // expansion cannot see are added on top.  Moments below the cancellation
  // floor eps^{2/3} are the orthogonality zeros and are skipped outright:
  // the floor sits well above the coefficient rounding noise and well below
  // 1/condition, the smallest surviving norm.
  bool exterior(const std::vector<Real>& coeffs, int j, C z, bool want_deriv,
                Transform* out) const {
    using std::abs;
    using std::exp;
    using std::isfinite;
    const int deg = static_cast<int>(coeffs.size()) - 1;
    const double gap =
        static_cast<double>(abs(z)) - std::abs(static_cast<double>(a_[j]));
    if (!(gap > 0)) return false;
    const int turnaround = static_cast<int>(p_.N * gap * gap) - deg;
    if (turnaround < 8) return false;
    const int stop = std::min(turnaround, 600);
    const C zinv = C(Real(1)) / z;
    const Real azinv = abs(zinv);
    C zp = zinv;
    Real azp = azinv;
    C acc{}, accd{};
    Real abs_sum(0);
    std::array<Real, 6> window{};
    int used = 0;
    bool overflowed = false;
    int m = 0;
    auto surviving = [&](Real* tmag) {
      // Magnitude of term m when it survives the zero floor; false for the
      // orthogonality zeros.  Sets overflowed when moments leave the range.
      if (!isfinite(reduced_moment(j, deg + m))) {
        overflowed = true;
        return false;
      }
      Real mm(0), scale(0);
      for (int i = 0; i <= deg; ++i) {
        const Real t = coeffs[i] * reduced_moment(j, i + m);
        mm += t;
        scale += abs(t);
      }
      mm *= s_[j];
      if (!(abs(mm) > zero_tol_ * scale * s_[j])) return false;
      *tmag = abs(mm) * azp;
      if (!isfinite(*tmag)) {
        overflowed = true;
        return false;
      }
      acc += C(mm) * zp;
      if (want_deriv) accd -= C(Real(m + 1) * mm) * zp * zinv;
      return true;
    };
    auto advance = [&] {
      ++m;
      zp *= zinv;
      azp *= azinv;
    };
    bool converged = false;
    while (m <= stop && !overflowed && !converged) {
      Real tmag(0);
      if (surviving(&tmag)) {
        abs_sum += tmag;
        window[used % 6] = tmag;
        ++used;
        converged =
            used >= 6 &&
            *std::max_element(window.begin(), window.end()) <= eps_ * abs(acc);
      }
      advance();
    }
    if (used == 0) return false;
    // Tail estimate: the envelope just past the stopping point, read off the
    // next few surviving terms (kept out of the sum on purpose; the factor
    // covers the geometric tail they head).
    Real trunc(0);
    {
      const C acc_keep = acc, accd_keep = accd;
      int seen = 0;
      for (int extra = 0; extra < 40 && seen < 6 && !overflowed; ++extra) {
        Real tmag(0);
        if (surviving(&tmag)) {
          trunc = std::max(trunc, tmag);
          ++seen;
        }
        advance();
      }
      acc = acc_keep;
      accd = accd_keep;
      trunc *= 2;
      if (seen == 0)
        trunc = overflowed ? std::numeric_limits<Real>::infinity()
                           : eps_ * abs_sum;
    }
    const Real denom = abs(acc);
    if (!(denom > Real(0)) || !isfinite(trunc)) return false;
    Real jump(0);
    if (z.imag() == Real(0)) {
      const Real x = z.real();
      Real pval(0);
      for (int i = deg; i >= 0; --i) pval = pval * x + coeffs[i];
      jump = abs(pval) * exp(-Real(p_.N) * (x * x / 2 - a_[j] * x));
    }
    const C pref = C(Real(0), Real(1) / two_pi_);
    out->value = pref * acc;
    out->deriv = pref * accd;
    out->rel_err = static_cast<double>((trunc + eps_ * abs_sum + jump) / denom);
    return true;
  }

  Transform transform(const std::vector<Real>& coeffs, int j, C z, Side side,
                      bool want_deriv) const {
    using std::abs;
    const bool on_axis = z.imag() == Real(0);
    if (on_axis && side == Side::off_axis)
      throw ConfigError("boundary Cauchy transform needs a declared side");
    const bool upper = on_axis ? side == Side::above : z.imag() > Real(0);
    Transform best;
    bool have = false;
    if (abs(z) > Real(switch_radius_)) {
      Transform ext;
      if (exterior(coeffs, j, z, want_deriv, &ext)) {
        if (ext.rel_err <= 1e-8) return ext;
        best = ext;
        have = true;
      }
    }
    const Transform fw = forward(coeffs, j, z, upper, want_deriv);
    if (!have || fw.rel_err < best.rel_err) best = fw;
    if (!(best.rel_err <= 1e-6))
      throw PrecisionLoss("Cauchy transform lost " +
                          std::to_string(best.rel_err) +
                          " relative; no evaluation path is accurate here");
    return best;
  }

  static C horner(const std::vector<Real>& c, C z) {
    C acc(c.back());
    for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k)
      acc = acc * z + C(c[k]);
    return acc;
  }

  static C horner_deriv(const std::vector<Real>& c, C z) {
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg == 0) return C(Real(0));
    C acc(Real(deg) * c[deg]);
    for (int k = deg - 1; k >= 1; --k) acc = acc * z + C(Real(k) * c[k]);
    return acc;
  }

  // Y rows: the family itself, then its three lowered families scaled by
  // c_j = -2 pi i / h^{(j)}_{lowered}; columns: the polynomial, then the
  // transforms against the three weights.  yd, when requested, receives the
  // analytic z-derivative built from the companion recursion.
  Mat4 y_at(const MopIndex& idx, C z, Side side, Mat4* yd) const {
    if (idx.k1 < 1 || idx.k2 < 1 || idx.k3 < 1)
      throw ConfigError("Y requires every index entry to be positive");
    const Fam& top = fam_at(idx);
    const Fam* rows[4] = {&top, &fam_at(lowered(idx, 0)),
                          &fam_at(lowered(idx, 1)), &fam_at(lowered(idx, 2))};
    Mat4 y;
    for (int r = 0; r < 4; ++r) {
      const C scale = r == 0 ? C(Real(1)) : top.c_consts[r - 1];
      y(r, 0) = scale * horner(rows[r]->coeffs, z);
      if (yd) (*yd)(r, 0) = scale * horner_deriv(rows[r]->coeffs, z);
      for (int l = 1; l < 4; ++l) {
        const Transform t =
            transform(rows[r]->coeffs, l - 1, z, side, yd != nullptr);
        y(r, l) = scale * t.value;
        if (yd) (*yd)(r, l) = scale * t.deriv;
      }
    }
    return y;
  }

  std::array<C, 4> dc_inverse(const Fam& top) const {
    std::array<C, 4> dinv;
    dinv[0] = C(Real(1));
    for (int j = 1; j < 4; ++j) dinv[j] = C(Real(1)) / top.c_consts[j - 1];
    return dinv;
  }

  std::array<C, 4> exp_column(C z) const {
    using std::exp;
    std::array<C, 4> e;
    e[0] = exp(z * z * C(-Real(p_.N) / 2));
    for (int j = 1; j < 4; ++j) e[j] = exp(z * C(-Real(p_.N) * a_[j - 1]));
    return e;
  }

  Mat4 psi_at(const MopIndex& idx, C z) const {
    const Mat4 y = y_at(idx, z, Side::off_axis, nullptr);
    const std::array<C, 4> dinv = dc_inverse(fam_at(idx));
    const std::array<C, 4> ecol = exp_column(z);
    Mat4 psi;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) psi(r, c) = dinv[r] * y(r, c) * ecol[c];
    return psi;
  }

  Mat4 ode_matrix(const MopIndex& idx, C z) const {
    Mat4 a = Mat4::Zero();
    a(0, 0) = -z;
    a(0, 1) = C(Real(idx.k1) / Real(p_.N));
    a(0, 2) = C(Real(idx.k2) / Real(p_.N));
    a(0, 3) = C(Real(idx.k3) / Real(p_.N));
    for (int j = 1; j < 4; ++j) {
      a(j, 0) = C(Real(-1));
      a(j, j) = C(-a_[j - 1]);
    }
    return a;
  }

  // Y' = N (Dc A Dc^{-1} Y + Y diag(z, a_1, a_2, a_3)): the conjugated
  // equation the kernel diagonal uses, independent of the recursion that
  // produces the analytic derivative.
  Mat4 ode_derivative(const MopIndex& idx, C z, const Mat4& y) const {
    const Fam& top = fam_at(idx);
    const std::array<int, 3> kk{idx.k1, idx.k2, idx.k3};
    Mat4 b = Mat4::Zero();
    b(0, 0) = -z;
    for (int j = 1; j < 4; ++j) {
      b(0, j) = C(Real(kk[j - 1]) / Real(p_.N)) / top.c_consts[j - 1];
      b(j, 0) = -top.c_consts[j - 1];
      b(j, j) = C(-a_[j - 1]);
    }
    Mat4 d = Mat4::Zero();
    d(0, 0) = z;
    for (int j = 1; j < 4; ++j) d(j, j) = C(a_[j - 1]);
    return Mat4(b * y + y * d) * C(Real(p_.N));
  }

  Row4 row_weights(Real u) const {
    using std::exp;
    Row4 rv;
    rv(0) = C(Real(0));
    for (int j = 0; j < 3; ++j) rv(j + 1) = C(exp(Real(p_.N) * a_[j] * u));
    return rv;
  }

  static C minor3(const Mat4& m, int dr, int dc) {
    int rr[3], cc[3];
    for (int i = 0, k = 0; i < 4; ++i)
      if (i != dr) rr[k++] = i;
    for (int i = 0, k = 0; i < 4; ++i)
      if (i != dc) cc[k++] = i;
    return m(rr[0], cc[0]) * (m(rr[1], cc[1]) * m(rr[2], cc[2]) -
                              m(rr[1], cc[2]) * m(rr[2], cc[1])) -
           m(rr[0], cc[1]) * (m(rr[1], cc[0]) * m(rr[2], cc[2]) -
                              m(rr[1], cc[2]) * m(rr[2], cc[0])) +
           m(rr[0], cc[2]) * (m(rr[1], cc[0]) * m(rr[2], cc[1]) -
                              m(rr[1], cc[1]) * m(rr[2], cc[0]));
  }

  // Unit determinant makes the adjugate the exact inverse; cofactors avoid
  // the pivoting noise of a solve at matched cost for a 4x4.
  static Mat4 adjugate(const Mat4& m) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const C c = minor3(m, j, i);
        r(i, j) = ((i + j) % 2 == 0) ? c : C(Real(0)) - c;
      }
    return r;
  }

  static Real frobenius(const Mat4& m) {
    using std::norm;
    using std::sqrt;
    Real s(0);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) s += norm(m(r, c));
    return sqrt(s);
  }

  FiniteSizeParams p_;
  mutable std::mutex lock_;
  mutable FamilyWorkshop work_;
  mutable std::array<std::vector<Real>, 3> rmu_;
  mutable std::map<std::array<int, 3>, std::unique_ptr<Fam>> fams_;
  std::array<Real, 3> a_, s_;
  Real two_pi_, root_pi_, half_n_root_, eps_, zero_tol_;
  double switch_radius_;
};

extern template class FiniteCore<DoubleTraits>;
extern template class FiniteCore<ExtendedTraits>;

}  // namespace tricut::detail
