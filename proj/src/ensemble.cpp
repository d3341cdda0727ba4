#include "tricut/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "tricut/errors.hpp"
#include "tricut/quadrature.hpp"

namespace tricut {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// splitmix64 stream; one per draw
class Stream {
 public:
  explicit Stream(std::uint64_t state) : state_(state) {}

  std::uint64_t next() { return mix64(state_ += kStep); }

  // strictly inside (0, 1)
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    have_ = true;
    return r * std::cos(phi);
  }

 private:
  static constexpr std::uint64_t kStep = 0x9E3779B97F4A7C15ull;
  std::uint64_t state_;
  double spare_ = 0;
  bool have_ = false;
};

void validate(const EnsembleConfig& cfg) {
  const FiniteSizeParams& p = cfg.fp;
  if (p.n < 1) throw ConfigError("ensemble: matrix size must be at least 1");
  if (p.n1 < 0 || p.n2 < 0 || p.n3 < 0 || p.n1 + p.n2 + p.n3 != p.n)
    throw ConfigError("ensemble: source multiplicities must be nonnegative and sum to n");
  if (p.a < 0) throw ConfigError("ensemble: source eigenvalue a must be nonnegative");
  if (cfg.draws < 1) throw ConfigError("ensemble: draw count must be positive");
}

// diagonal entries N(0, 1/n); off-diagonal complex with each part N(0, 1/2n)
Eigen::MatrixXcd draw_matrix(const EnsembleConfig& cfg, Stream& st) {
  const int n = cfg.fp.n;
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  const double so = 1.0 / std::sqrt(2.0 * n);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = sd * st.normal();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = std::complex<double>(so * st.normal(), so * st.normal());
      m(j, i) = std::conj(m(i, j));
    }
  for (int i = 0; i < n; ++i)
    m(i, i) += i < cfg.fp.n1 ? cfg.fp.a : (i < cfg.fp.n1 + cfg.fp.n2 ? 0.0 : -cfg.fp.a);
  return m;
}

struct Interval {
  double lo, hi;
};

std::array<Interval, 3> support_intervals(const SupportData& s) {
  return {{{-s.z3, -s.z2}, {-s.z1, s.z1}, {s.z2, s.z3}}};
}

}  // namespace

std::vector<EigenSample> sample_eigenvalues(const EnsembleConfig& cfg) {
  validate(cfg);
  std::vector<EigenSample> out;
  out.reserve(cfg.draws);
  for (int d = 0; d < cfg.draws; ++d) {
    std::uint64_t stream_seed = mix64(cfg.seed + mix64(static_cast<std::uint64_t>(d) + 1));
    EigenSample sample;
    sample.draw_index = d;
    for (int attempt = 0;; ++attempt) {
      Stream st(stream_seed);
      const Eigen::MatrixXcd m = draw_matrix(cfg, st);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
      if (es.info() == Eigen::Success) {
        sample.seed_used = stream_seed;
        const auto& ev = es.eigenvalues();
        sample.eigenvalues.assign(ev.data(), ev.data() + ev.size());
        break;
      }
      if (attempt == 1)
        throw EigenSolverFailure("ensemble: eigensolver failed twice on draw " +
                                 std::to_string(d));
      stream_seed = mix64(stream_seed ^ 0xA5A5A5A5A5A5A5A5ull);
      sample.retried = true;
    }
    out.push_back(std::move(sample));
  }
  return out;
}

HistogramComparison empirical_density(const ModelParams& params,
                                      const SupportData& support,
                                      const std::vector<EigenSample>& samples,
                                      double bin_width, double margin_scale) {
  if (samples.empty()) throw ConfigError("ensemble: histogram needs at least one draw");
  if (!(bin_width > 0)) throw ConfigError("ensemble: bin width must be positive");

  double lo = -support.z3, hi = support.z3;
  std::size_t total = 0;
  for (const EigenSample& s : samples) {
    total += s.eigenvalues.size();
    lo = std::min(lo, s.eigenvalues.front());
    hi = std::max(hi, s.eigenvalues.back());
  }

  HistogramComparison h;
  h.margin = margin_scale * support.z3;
  const long k0 = static_cast<long>(std::floor((lo - h.margin) / bin_width));
  const long k1 = static_cast<long>(std::ceil((hi + h.margin) / bin_width));
  const long bins = k1 - k0;
  h.edges.resize(bins + 1);
  for (long k = 0; k <= bins; ++k) h.edges[k] = (k0 + k) * bin_width;

  std::vector<std::size_t> counts(bins, 0);
  const double inv = 1.0 / static_cast<double>(total);
  const auto iv = support_intervals(support);
  std::size_t outside = 0;
  for (const EigenSample& s : samples)
    for (double x : s.eigenvalues) {
      long k = static_cast<long>(std::floor(x / bin_width)) - k0;
      counts[std::clamp(k, 0l, bins - 1)] += 1;
      bool near = false;
      for (const Interval& i : iv)
        near = near || (x >= i.lo - h.margin && x <= i.hi + h.margin);
      outside += near ? 0 : 1;
    }
  h.empirical.resize(bins);
  for (long k = 0; k < bins; ++k) h.empirical[k] = static_cast<double>(counts[k]) * inv;
  h.outside_fraction = static_cast<double>(outside) * inv;

  h.predicted.assign(bins, 0.0);
  for (long k = 0; k < bins; ++k) {
    double mass = 0;
    for (const Interval& i : iv) {
      const double a = std::max(h.edges[k], i.lo);
      const double b = std::min(h.edges[k + 1], i.hi);
      if (a >= b) continue;
      mass += integrate([&](double x) { return rho(params, support, x); }, a, b, 1e-9);
    }
    h.predicted[k] = mass;
    h.max_deviation = std::max(h.max_deviation, std::abs(mass - h.empirical[k]));
  }
  return h;
}

EdgeStatistics edge_statistics(const ModelParams& params, const SupportData& support,
                               const std::vector<EigenSample>& samples, double edge) {
  if (samples.empty()) throw ConfigError("ensemble: edge statistics need draws");
  const double cands[6] = {-support.z3, -support.z2, -support.z1,
                           support.z1,  support.z2,  support.z3};
  int which = -1;
  for (int i = 0; i < 6; ++i)
    if (std::abs(edge - cands[i]) < 1e-9) which = i;
  if (which < 0) throw ConfigError("ensemble: edge must be one of the six endpoints");
  const double e = cands[which];

  // right-facing endpoints close an interval from above: -z2, z1, z3
  const bool right = which == 1 || which == 3 || which == 5;
  // basin cuts at the two gap midpoints
  const double g1 = -0.5 * (support.z1 + support.z2);
  const double g2 = 0.5 * (support.z1 + support.z2);
  const int basin = which / 2;  // 0 left, 1 center, 2 right

  double c = 0;
  for (const auto& [x, v] : edge_constants(params, support))
    if (std::abs(x - e) < 1e-9) c = v;

  EdgeStatistics st;
  st.edge = e;
  const int n = static_cast<int>(samples.front().eigenvalues.size());
  st.scale = std::pow(c * n, 2.0 / 3.0);
  for (const EigenSample& s : samples) {
    bool found = false;
    double extreme = 0;
    for (double x : s.eigenvalues) {
      const int b = x < g1 ? 0 : (x <= g2 ? 1 : 2);
      if (b != basin) continue;
      if (!found || (right ? x > extreme : x < extreme)) extreme = x;
      found = true;
    }
    if (!found) continue;  // no eigenvalue landed in this basin
    st.rescaled.push_back((right ? extreme - e : e - extreme) * st.scale);
  }
  if (st.rescaled.empty())
    throw ConfigError("ensemble: no draw populated the requested interval");
  for (double r : st.rescaled) st.mean += r;
  st.mean /= static_cast<double>(st.rescaled.size());
  for (double r : st.rescaled) st.variance += (r - st.mean) * (r - st.mean);
  st.variance /= static_cast<double>(st.rescaled.size());
  return st;
}

}  // namespace tricut
