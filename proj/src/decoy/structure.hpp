#pragma once

#include "agd/mdp.hpp"

#include <vector>

namespace agd::detail {

/// M(x,Y) transitions (every state of `decoys` absorbing) with reward y on
/// the decoys, the original reward on unsensed targets when
/// `keep_targets`, and 0 elsewhere. Unlike induce_perceptual_mdp the
/// structure does not depend on which y are positive.
AttackMdp decoy_structure(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                          const std::vector<double>& y_full, bool keep_targets = true);

/// Spreads per-decoy values over a full state vector.
std::vector<double> scatter(std::size_t num_states, const std::vector<StateId>& decoys, const std::vector<double>& y);

}  // namespace agd::detail
