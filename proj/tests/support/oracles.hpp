#pragma once

#include <vector>

#include "dml/model_graph.hpp"
#include "dml/pathsets.hpp"

namespace dml::testing {

// Minimal leaf sets that make `node` true, found by enumerating all 2^L
// outcomes of the leaves below it. Ordered like minimize().
std::vector<PathSet> minimal_satisfying_sets(const ModelGraph& graph, NodeId node);

// Raw path-set count from the gate algebra alone: AND multiplies child
// counts, OR adds them.
std::size_t expected_raw_count(const ModelGraph& graph, NodeId node);

// Truth value of `node` when exactly the leaves in `set` succeed.
bool satisfies(const ModelGraph& graph, NodeId node, const PathSet& set);

}  // namespace dml::testing
