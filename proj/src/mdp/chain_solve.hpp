#pragma once

#include "agd/mdp.hpp"

#include <vector>

namespace agd::detail {

/// Marks states from which the sink is reachable along positive-probability edges.
std::vector<bool> reaches_sink(const MarkovChain& chain);

/// Marks states reachable from the support of `start`.
std::vector<bool> reachable_from(const MarkovChain& chain, const std::vector<double>& start);

/// Solves (I - λP) v = rhs (or its transpose) over the non-sink states; the
/// sink entry of the result is 0. Throws std::runtime_error if the system is
/// singular.
std::vector<double> solve_chain(const MarkovChain& chain, double lambda, const std::vector<double>& rhs,
                                bool transpose);

}  // namespace agd::detail
