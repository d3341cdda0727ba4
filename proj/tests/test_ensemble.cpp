#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "tricut/ensemble.hpp"
#include "tricut/errors.hpp"

namespace {

using tricut::EnsembleConfig;
using tricut::FiniteSizeParams;
using tricut::ModelParams;
using tricut::SupportData;

const ModelParams& reference_params() {
  static const ModelParams p = ModelParams::three_cut(2.0, 1.0 / 3.0);
  return p;
}

const SupportData& reference_support() {
  static const SupportData s = tricut::branch_points(reference_params());
  return s;
}

// the acceptance-scale run, shared across cases
const std::vector<tricut::EigenSample>& reference_samples() {
  static const std::vector<tricut::EigenSample> s = [] {
    EnsembleConfig cfg{FiniteSizeParams::split(300, 1.0 / 3.0, 2.0), 20240817, 100};
    return tricut::sample_eigenvalues(cfg);
  }();
  return s;
}

double basin_fraction(const std::vector<tricut::EigenSample>& samples, double lo,
                      double hi) {
  std::size_t inside = 0, total = 0;
  for (const auto& s : samples)
    for (double x : s.eigenvalues) {
      total += 1;
      inside += (x >= lo && x < hi) ? 1 : 0;
    }
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("samples are sorted, sized, and deterministic") {
  EnsembleConfig cfg{FiniteSizeParams::split(40, 0.5, 2.0), 7, 5};
  const auto a = tricut::sample_eigenvalues(cfg);
  REQUIRE(a.size() == 5);
  for (int d = 0; d < 5; ++d) {
    CHECK(a[d].draw_index == d);
    CHECK(a[d].eigenvalues.size() == 40);
    CHECK(std::is_sorted(a[d].eigenvalues.begin(), a[d].eigenvalues.end()));
    CHECK_FALSE(a[d].retried);
  }

  const auto b = tricut::sample_eigenvalues(cfg);
  for (int d = 0; d < 5; ++d) CHECK(a[d].eigenvalues == b[d].eigenvalues);

  // streams hang off (seed, draw index) alone, so a shorter run is a prefix
  cfg.draws = 3;
  const auto c = tricut::sample_eigenvalues(cfg);
  for (int d = 0; d < 3; ++d) CHECK(a[d].eigenvalues == c[d].eigenvalues);

  cfg.seed = 8;
  const auto e = tricut::sample_eigenvalues(cfg);
  CHECK(e[0].eigenvalues != a[0].eigenvalues);
}

TEST_CASE("config validation") {
  EnsembleConfig cfg{FiniteSizeParams::split(12, 0.5, 2.0), 1, 1};
  cfg.draws = 0;
  CHECK_THROWS_AS(tricut::sample_eigenvalues(cfg), tricut::ConfigError);
  cfg.draws = 1;
  cfg.fp.n2 += 1;  // multiplicities no longer sum to n
  CHECK_THROWS_AS(tricut::sample_eigenvalues(cfg), tricut::ConfigError);
  cfg.fp.n2 -= 1;
  cfg.fp.a = -0.5;
  CHECK_THROWS_AS(tricut::sample_eigenvalues(cfg), tricut::ConfigError);
}

TEST_CASE("a degenerate source reproduces the semicircle") {
  FiniteSizeParams fp{};
  fp.n = 400;
  fp.n1 = 133;
  fp.n2 = 134;
  fp.n3 = 133;
  fp.a = 0.0;
  fp.N = 400;
  const auto samples = tricut::sample_eigenvalues(EnsembleConfig{fp, 99, 50});
  std::size_t outside = 0, total = 0;
  for (const auto& s : samples)
    for (double x : s.eigenvalues) {
      total += 1;
      outside += (x < -2.1 || x > 2.1) ? 1 : 0;
    }
  CHECK(static_cast<double>(outside) / static_cast<double>(total) < 0.01);
}

TEST_CASE("the trace fluctuates around zero") {
  EnsembleConfig cfg{FiniteSizeParams::split(60, 0.5, 2.0), 3, 100};
  const auto samples = tricut::sample_eigenvalues(cfg);
  double mean = 0;
  for (const auto& s : samples)
    for (double x : s.eigenvalues) mean += x;
  mean /= static_cast<double>(samples.size());
  // Var(tr) = 1, so the 100-draw mean sits within 5 sigma of 0
  CHECK(std::abs(mean) < 0.5);
}

TEST_CASE("three clusters match the predicted histogram") {
  const auto& samples = reference_samples();
  const auto h = tricut::empirical_density(reference_params(), reference_support(),
                                           samples, 0.1);

  double emp_sum = 0, pred_sum = 0;
  for (double m : h.empirical) emp_sum += m;
  for (double m : h.predicted) pred_sum += m;
  CHECK(std::abs(emp_sum - 1.0) < 1e-12);
  CHECK(std::abs(pred_sum - 1.0) < 1e-8);

  CHECK(h.max_deviation <= 0.02);
  CHECK(h.outside_fraction <= 0.01);
  CHECK(h.margin == doctest::Approx(0.05 * reference_support().z3));

  // interval masses, cut at the gap midpoints
  const SupportData& s = reference_support();
  const double g = 0.5 * (s.z1 + s.z2);
  CHECK(std::abs(basin_fraction(samples, -100.0, -g) - 1.0 / 3.0) < 0.01);
  CHECK(std::abs(basin_fraction(samples, -g, g) - 1.0 / 3.0) < 0.01);
  CHECK(std::abs(basin_fraction(samples, g, 100.0) - 1.0 / 3.0) < 0.01);

  CHECK_THROWS_AS(
      tricut::empirical_density(reference_params(), reference_support(), samples, 0.0),
      tricut::ConfigError);
}

TEST_CASE("rescaled extremes sit on the bulk side of each outer edge") {
  const auto& samples = reference_samples();
  const SupportData& s = reference_support();

  const auto right = tricut::edge_statistics(reference_params(), s, samples, s.z3);
  CHECK(right.edge == s.z3);
  CHECK(right.rescaled.size() == samples.size());
  CHECK(right.mean < -0.3);
  CHECK(right.mean > -4.0);  // the classical edge mean is about -1.77
  CHECK(right.variance > 0.1);
  CHECK(right.variance < 4.0);

  const auto left = tricut::edge_statistics(reference_params(), s, samples, -s.z3);
  CHECK(left.mean < -0.3);
  CHECK(std::abs(left.mean - right.mean) < 0.8);

  CHECK_THROWS_AS(tricut::edge_statistics(reference_params(), s, samples, 0.123),
                  tricut::ConfigError);
}

TEST_CASE("interior edges restrict to the adjacent interval") {
  const auto& samples = reference_samples();
  const SupportData& s = reference_support();
  const auto st = tricut::edge_statistics(reference_params(), s, samples, s.z2);
  // minima of the right cluster: none may come from the center interval
  const double g = 0.5 * (s.z1 + s.z2);
  for (double r : st.rescaled) {
    const double x = s.z2 - r / st.scale;  // undo the left-facing rescale
    CHECK(x > g);
  }
  CHECK(st.mean < 0.5);  // hard wall pushes into the bulk side here as well
}

TEST_CASE("extreme fluctuation scale is stable in n") {
  const auto small = tricut::sample_eigenvalues(
      EnsembleConfig{FiniteSizeParams::split(150, 1.0 / 3.0, 2.0), 5, 100});
  const auto v150 =
      tricut::edge_statistics(reference_params(), reference_support(), small,
                              reference_support().z3);
  const auto v300 = tricut::edge_statistics(reference_params(), reference_support(),
                                            reference_samples(),
                                            reference_support().z3);
  const double ratio = v150.variance / v300.variance;
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
}
