#pragma once

#include <cstddef>
#include <vector>

#include "dml/model_graph.hpp"

namespace dml {

// Leaf ids (success conditions, or condition-less components), sorted, unique.
using PathSet = std::vector<NodeId>;

inline constexpr std::size_t kDefaultPathSetLimit = 10000;

struct PathSetCollection {
  NodeId source;
  std::vector<PathSet> sets;
  bool minimized = false;
};

// Downward expansion of success paths below `node`: AND gates combine child
// collections by Cartesian product with set union, OR gates concatenate them.
// The result is raw (may hold duplicates and supersets). Throws
// PATHSET_EXPLOSION when any intermediate collection would exceed `limit`.
PathSetCollection generate_pathsets(const ModelGraph& graph, NodeId node,
                                    std::size_t limit = kDefaultPathSetLimit);

// Absorption: drops duplicates and proper supersets; orders by size, then
// lexicographically.
PathSetCollection minimize(PathSetCollection collection);

}  // namespace dml
