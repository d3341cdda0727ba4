#pragma once

#include <cstdint>
#include <vector>

#include "tricut/density.hpp"
#include "tricut/finite.hpp"
#include "tricut/spectral_curve.hpp"

namespace tricut {

// One Monte Carlo run: draws independent Hermitian matrices A + X with
// Gaussian fluctuation scaled so the density is proportional to
// exp(-n tr(M^2/2 - AM)), where A carries eigenvalue a with multiplicity n1,
// 0 with n2 and -a with n3.  a = 0 collapses to the plain Gaussian ensemble
// and is allowed; it serves as the classical cross-check.
struct EnsembleConfig {
  FiniteSizeParams fp;
  std::uint64_t seed = 0;
  int draws = 1;
};

struct EigenSample {
  std::vector<double> eigenvalues;  // ascending, length n
  int draw_index = 0;
  std::uint64_t seed_used = 0;
  bool retried = false;  // solver was rerun on a perturbed stream
};

// Pooled histogram against the predicted bin masses integral of rho.  Bins
// are aligned to multiples of the width and cover both every sample and the
// support inflated by the margin, so the empirical masses sum to exactly 1
// and the predicted masses to 1 up to quadrature tolerance.
struct HistogramComparison {
  std::vector<double> edges;      // bin count + 1, ascending
  std::vector<double> empirical;  // mass per bin
  std::vector<double> predicted;  // integral of rho over the bin
  double max_deviation = 0;
  double outside_fraction = 0;  // samples farther than margin from the support
  double margin = 0;
};

// Interval-restricted extremes near one edge, rescaled by the local Airy
// width (rho_edge n)^{2/3} and signed so the bulk side is negative.  Samples
// are assigned to intervals by cutting at the gap midpoints.
struct EdgeStatistics {
  double edge = 0;
  double scale = 0;  // (rho_edge(edge) * n)^{2/3}
  std::vector<double> rescaled;
  double mean = 0;
  double variance = 0;
};

// Every draw owns an RNG stream derived from (seed, draw_index), so the
// result is independent of evaluation order.  Deterministic bit for bit.
std::vector<EigenSample> sample_eigenvalues(const EnsembleConfig& cfg);

HistogramComparison empirical_density(const ModelParams& params,
                                      const SupportData& support,
                                      const std::vector<EigenSample>& samples,
                                      double bin_width,
                                      double margin_scale = 0.05);

EdgeStatistics edge_statistics(const ModelParams& params, const SupportData& support,
                               const std::vector<EigenSample>& samples, double edge);

}  // namespace tricut
