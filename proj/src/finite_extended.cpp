#include "tricut/detail/finite_core.hpp"

// The 80-digit evaluation profile.  Isolated here so the heavy
// multiprecision instantiation is compiled once.

namespace tricut::detail {

template class FiniteCore<ExtendedTraits>;

}  // namespace tricut::detail
