#pragma once

#include <cstdint>
#include <vector>

#include "openobj/mask_graph.hpp"

namespace openobj {

// Weighted modularity Q of a node-to-community assignment on g.
double weighted_modularity(const MaskGraph& g, const std::vector<int>& community);

// Louvain community detection: sweeps of single-node moves on strictly
// positive modularity gain (ties to the lowest community index), then graph
// aggregation, iterated to a fixpoint. Node visit order is shuffled from
// `seed`; the result is deterministic for a fixed seed. Communities are
// renumbered 0..K-1 by first appearance.
std::vector<int> louvain(const MaskGraph& g, uint64_t seed);

}  // namespace openobj
