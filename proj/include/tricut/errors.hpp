#pragma once

#include <stdexcept>
#include <string>

namespace tricut {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// xi coincides with a pole of z(xi) at {0, +a, -a}
class PoleAtXi : public Error {
public:
  using Error::Error;
};

// two tracked sheets could not be separated along the continuation path
class ContinuationFailure : public Error {
public:
  using Error::Error;
};

// operation requires the three-cut phase (b = a^2 > 3)
class PhaseError : public Error {
public:
  using Error::Error;
};

// computed branch points are not strictly ordered; signals root mispairing
class OrderingViolation : public Error {
public:
  using Error::Error;
};

// |z''(xi_c)| too small to extract a square-root edge constant
class DegenerateEdge : public Error {
public:
  using Error::Error;
};

// adaptive quadrature failed to reach tolerance within the depth limit
class QuadratureNonConvergence : public Error {
public:
  using Error::Error;
};

// requested integration path would cross a branch cut
class PathCrossesCut : public Error {
public:
  using Error::Error;
};

// evaluation point lies outside the support of the density
class OutOfSupport : public Error {
public:
  using Error::Error;
};

// evaluation too close to a branch point of the model problem
class BranchPointSingularity : public Error {
public:
  using Error::Error;
};

// linear system condition number exceeds what the active precision supports
class IllConditioned : public Error {
public:
  using Error::Error;
};

// catastrophic cancellation detected in a recursion
class PrecisionLoss : public Error {
public:
  using Error::Error;
};

// numeric range exceeded; caller should use the log-scaled variant
class Overflow : public Error {
public:
  using Error::Error;
};

// eigenvalue solver failed to converge
class EigenSolverFailure : public Error {
public:
  using Error::Error;
};

// invalid CLI / configuration input
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace tricut
