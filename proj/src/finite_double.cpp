#include "tricut/finite.hpp"

#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tricut/density.hpp"
#include "tricut/detail/finite_core.hpp"
#include "tricut/errors.hpp"
#include "tricut/lambda.hpp"

namespace tricut {

namespace detail {
template class FiniteCore<DoubleTraits>;
}  // the extended profile is instantiated in its own translation unit

namespace {

// Boundary of the double evaluation profile.  Above it the transform sums
// cancel past what double can resolve (measured ~1e-5 relative by n = 12),
// so the engine switches to the 80-digit scalar for everything it
// evaluates.
constexpr int kDoubleProfileMax = 6;

Complex to_public(const detail::ExtComplex& v) {
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

detail::ExtComplex to_extended(Complex z) {
  return {detail::Ext(z.real()), detail::Ext(z.imag())};
}

Eigen::Matrix4cd to_public(const Eigen::Matrix<detail::ExtComplex, 4, 4>& m) {
  Eigen::Matrix4cd out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = to_public(m(r, c));
  return out;
}

void validate_weight(int j) {
  if (j < 0 || j > 2)
    throw ConfigError("weight index j must be 0, 1, or 2");
}

void validate(const FiniteSizeParams& p) {
  if (p.n < 1 || p.n1 < 0 || p.n2 < 0 || p.n3 < 0 ||
      p.n1 + p.n2 + p.n3 != p.n)
    throw ConfigError("inconsistent finite-size parameters");
  if (p.N != p.n) throw ConfigError("the weight scale N must equal n");
  if (!(p.a > 0)) throw ConfigError("source separation a must be positive");
}

}  // namespace

FiniteSizeParams FiniteSizeParams::split(int n, double t, double a) {
  if (n < 3) throw ConfigError("n must be at least 3 to give every source a slot");
  if (!(a > 0)) throw ConfigError("source separation a must be positive");
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("mass fraction t must lie in (0, 1)");
  int n2 = static_cast<int>(std::lround(t * n));
  if ((n - n2) % 2 != 0) n2 += t * n >= n2 ? 1 : -1;
  FiniteSizeParams p;
  p.n = n;
  p.n2 = n2;
  p.n1 = p.n3 = (n - n2) / 2;
  p.a = a;
  p.N = n;
  if (p.n1 < 1 || p.n2 < 1)
    throw ConfigError("n and t leave some source without a slot");
  return p;
}

FiniteSizeParams FiniteSizeParams::counts(int n1, int n2, int n3, double a) {
  if (n1 != n3)
    throw ConfigError("the outer sources need equal multiplicities");
  if (n1 < 1 || n2 < 1)
    throw ConfigError("every source needs multiplicity at least 1");
  if (!(a > 0)) throw ConfigError("source separation a must be positive");
  FiniteSizeParams p;
  p.n1 = n1;
  p.n2 = n2;
  p.n3 = n3;
  p.n = n1 + n2 + n3;
  p.a = a;
  p.N = p.n;
  return p;
}

struct FiniteEvaluator::Impl {
  FiniteSizeParams p;
  std::unique_ptr<detail::FiniteCore<detail::DoubleTraits>> dc;
  std::unique_ptr<detail::FiniteCore<detail::ExtendedTraits>> xc;

  std::once_flag geometry_once;
  std::unique_ptr<LambdaEvaluator> geometry;
  std::exception_ptr geometry_error;

  std::mutex h_lock;
  std::map<double, double> h_cache;

  Impl(const FiniteSizeParams& params, Profile profile) : p(params) {
    const bool narrow = profile == Profile::narrow ||
                        (profile == Profile::automatic && p.n <= kDoubleProfileMax);
    if (narrow)
      dc = std::make_unique<detail::FiniteCore<detail::DoubleTraits>>(p);
    else
      xc = std::make_unique<detail::FiniteCore<detail::ExtendedTraits>>(p);
  }

  const LambdaEvaluator& geom() {
    std::call_once(geometry_once, [this] {
      try {
        geometry = std::make_unique<LambdaEvaluator>(
            ModelParams::three_cut(p.a, p.t()));
      } catch (...) {
        geometry_error = std::current_exception();
      }
    });
    if (!geometry) std::rethrow_exception(geometry_error);
    return *geometry;
  }

  double h_at(double x) {  // h_lock held
    if (auto it = h_cache.find(x); it != h_cache.end()) return it->second;
    const double v = geometry->h(x);
    h_cache.emplace(x, v);
    return v;
  }

  // False when the limiting geometry is unavailable or a point leaves the
  // support; the kernel then reports NaN for the rescaled value.
  bool try_h_diff(double x, double y, double* out) {
    try {
      geom();
    } catch (const Error&) {
      return false;
    }
    try {
      const std::lock_guard<std::mutex> hold(h_lock);
      *out = h_at(x) - h_at(y);
      return true;
    } catch (const OutOfSupport&) {
      return false;
    }
  }

  KernelEval kernel(double x, double y) {
    double hd = 0;
    bool have;
    if (std::abs(x - y) < 1e-8) {
      try {
        have = in_support(geom().support(), 0.5 * (x + y));
      } catch (const Error&) {
        have = false;
      }
    } else {
      have = try_h_diff(x, y, &hd);
    }
    const double* hp = have ? &hd : nullptr;
    const detail::KernelOut out = dc ? dc->kernel(x, y, hp) : xc->kernel(x, y, hp);
    KernelEval ke;
    ke.x = x;
    ke.y = y;
    ke.kn = out.kn;
    ke.hat_kn = out.hat_kn;
    ke.n = p.n;
    return ke;
  }
};

FiniteEvaluator::FiniteEvaluator(const FiniteSizeParams& params, Profile profile) {
  validate(params);
  impl_ = std::make_unique<Impl>(params, profile);
}

FiniteEvaluator::~FiniteEvaluator() = default;
FiniteEvaluator::FiniteEvaluator(FiniteEvaluator&&) noexcept = default;
FiniteEvaluator& FiniteEvaluator::operator=(FiniteEvaluator&&) noexcept = default;

const FiniteSizeParams& FiniteEvaluator::params() const { return impl_->p; }

const SupportData& FiniteEvaluator::support() const {
  return impl_->geom().support();
}

MomentValue FiniteEvaluator::moment(int j, int k) const {
  validate_weight(j);
  if (k < 0 || k > 4 * impl_->p.n)
    throw ConfigError("moment order k must lie in [0, 4 n]");
  return impl_->dc ? impl_->dc->moment(j, k) : impl_->xc->moment(j, k);
}

MopFamily FiniteEvaluator::family(const MopIndex& index) const {
  return impl_->dc ? impl_->dc->family(index) : impl_->xc->family(index);
}

Complex FiniteEvaluator::cauchy(const MopIndex& index, int j, Complex z,
                                Side side) const {
  validate_weight(j);
  if (impl_->dc) return impl_->dc->cauchy_value(index, j, z, side);
  return to_public(impl_->xc->cauchy_value(index, j, to_extended(z), side));
}

YMatrix FiniteEvaluator::y_matrix(Complex z, Side side) const {
  YMatrix out;
  out.z = z;
  out.side = side;
  if (impl_->dc) {
    out.y = impl_->dc->y_matrix(z, side, &out.det_residual);
  } else {
    out.y =
        to_public(impl_->xc->y_matrix(to_extended(z), side, &out.det_residual));
  }
  return out;
}

KernelEval FiniteEvaluator::kernel(double x, double y) const {
  return impl_->kernel(x, y);
}

double FiniteEvaluator::hat_kernel(double x, double y) const {
  const SupportData& sd = impl_->geom().support();
  if (!in_support(sd, x) || !in_support(sd, y))
    throw OutOfSupport("hat kernel arguments must lie in the closed support");
  return impl_->kernel(x, y).hat_kn;
}

double FiniteEvaluator::ode_residual(Complex z) const {
  if (z.imag() == 0)
    throw ConfigError("differential-equation residual needs z off the real axis");
  return impl_->dc ? impl_->dc->ode_residual(z)
                   : impl_->xc->ode_residual(to_extended(z));
}

double FiniteEvaluator::recurrence_residual(const MopIndex& index,
                                            Complex z) const {
  if (z.imag() == 0)
    throw ConfigError("recurrence residual needs z off the real axis");
  return impl_->dc ? impl_->dc->recurrence_residual(index, z)
                   : impl_->xc->recurrence_residual(index, to_extended(z));
}

MomentValue moments(const FiniteSizeParams& params, int j, int k) {
  return FiniteEvaluator(params).moment(j, k);
}

MopFamily mop_build(const FiniteSizeParams& params, const MopIndex& index) {
  return FiniteEvaluator(params).family(index);
}

Complex cauchy_transform(const FiniteSizeParams& params, const MopFamily& family,
                         int j, Complex z, Side side) {
  validate(params);
  validate_weight(j);
  if (family.coeffs.size() == 0)
    throw ConfigError("family carries no coefficients");
  std::vector<double> coeffs(family.coeffs.data(),
                             family.coeffs.data() + family.coeffs.size());
  if (params.n <= kDoubleProfileMax) {
    detail::FiniteCore<detail::DoubleTraits> core(params);
    return core.cauchy_coeffs(coeffs, j, z, side);
  }
  detail::FiniteCore<detail::ExtendedTraits> core(params);
  return to_public(core.cauchy_coeffs(coeffs, j, to_extended(z), side));
}

YMatrix assemble_Y(const FiniteSizeParams& params, Complex z, Side side) {
  return FiniteEvaluator(params).y_matrix(z, side);
}

KernelEval kernel_Kn(const FiniteSizeParams& params, double x, double y) {
  return FiniteEvaluator(params).kernel(x, y);
}

double hat_kernel(const FiniteSizeParams& params, double x, double y) {
  return FiniteEvaluator(params).hat_kernel(x, y);
}

double verify_ode(const FiniteSizeParams& params, Complex z) {
  return FiniteEvaluator(params).ode_residual(z);
}

double verify_recurrence(const FiniteSizeParams& params, const MopIndex& index,
                         Complex z) {
  return FiniteEvaluator(params).recurrence_residual(index, z);
}

}  // namespace tricut
