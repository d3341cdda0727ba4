#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tricut/finite.hpp"

namespace tricut {

// sin(pi(u-v)) / (pi(u-v)); 1 on the diagonal (|u-v| < 1e-8).
double sine_kernel(double u, double v);

// (Ai(u)Ai'(v) - Ai'(u)Ai(v)) / (u-v); Ai'(u)^2 - u Ai(u)^2 on the diagonal.
double airy_kernel(double u, double v);

// One scaling-limit comparison: the rescaled finite-n kernel on a fixed
// (u, v) product grid against its limit, for every n in the list.  The same
// type carries the bulk, edge, and diagonal variants; `kind` names which.
//
// finite[i] is the scaled kernel surface for n_list[i]; limit is the target
// surface on the same grid.  For the diagonal variant the grid is a list of
// x values, the surfaces are 1 x m rows of (1/n) K_n(x, x), the limit row is
// rho, and max_err covers interior points only (open support, away from the
// edges); exterior and edge columns are reported but judged separately.
//
// nonincreasing: max_err never grows along n_list, allowing 10% slack on the
// first (smallest-n) pair.
struct LimitCheckReport {
  std::string kind;      // "bulk", "edge", "diagonal"
  std::vector<int> n_list;
  double x0 = 0;         // scaling point; the edge abscissa for "edge"
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> finite;
  Eigen::MatrixXd limit;
  std::vector<double> max_err;
  bool nonincreasing = false;
  double edge_constant = 0;   // "edge": the square-root constant used
  double swapped_err = 0;     // "edge": largest-n error under the z1/z3-swapped
                              // constant; large next to max_err.back() confirms
                              // the by-edge-point pairing
};

// (1/(n rho(x0))) hat K_n(x0 + u/(n rho(x0)), x0 + v/(n rho(x0))) against the
// sine kernel.  x0 must be interior; scale from the density module.
LimitCheckReport bulk_limit_check(const std::vector<FiniteSizeParams>& sizes,
                                  double x0,
                                  const std::vector<double>& grid = {-1.0, -0.5, 0.0,
                                                                     0.5, 1.0});

// Airy comparison at one of the six endpoints.  The scale is
// (rho_edge(edge) n)^{2/3} with the constant keyed by the edge point itself;
// the grid runs along the outward normal, so mirrored edges give mirrored
// reports.  Conjugation uses the whole-line extension of h, letting grid
// points leave the support.
LimitCheckReport edge_limit_check(const std::vector<FiniteSizeParams>& sizes,
                                  double edge,
                                  const std::vector<double>& grid = {-2.0, -1.0, 0.0,
                                                                     1.0});

// Scaled diagonal (1/n) K_n(x, x) against rho on an x grid; points may lie
// outside the support, where the limit row is zero.
LimitCheckReport diagonal_density_check(const std::vector<FiniteSizeParams>& sizes,
                                        const std::vector<double>& grid);

}  // namespace tricut
