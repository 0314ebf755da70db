#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dml/model_graph.hpp"
#include "dml/model_io.hpp"

namespace dml {

// Posterior P(state_i | data) per component, aligned with ComponentData::states.
// Components absent from the map fall back to their priors.
using EvidenceSet = std::map<NodeId, std::vector<double>>;

// Evidence keyed by names, as it arrives from documents and requests.
using NamedEvidence = std::map<std::string, std::vector<NamedProbability>>;

inline constexpr double kDefaultThreshold = 0.9;
inline constexpr std::size_t kBruteForceLeafLimit = 20;

struct PropagationConfig {
  double threshold = kDefaultThreshold;
};

struct NodeProbability {
  NodeId id;
  NodeKind kind = NodeKind::Goal;
  double p_success = 0.0;
  bool impacted = false;
};

struct Warning {
  std::string code;
  std::string message;
  std::vector<NodeId> nodes;
};

struct PropagationResult {
  double threshold = kDefaultThreshold;
  // One entry per non-gate node, in evaluation order (leaves first).
  std::vector<NodeProbability> entries;
  std::vector<Warning> warnings;

  const NodeProbability& at(NodeId id) const;  // throws NOT_FOUND
};

// Maps a named distribution onto the component's state order. States left out
// are taken as 0. Throws UNKNOWN_STATE, PROBABILITY_RANGE or PRIOR_SUM.
std::vector<double> resolve_distribution(const ComponentData& component, std::span<const NamedProbability> named,
                                         const std::string& component_name = {});
// Throws UNKNOWN_COMPONENT for names that are not components of `graph`.
EvidenceSet resolve_evidence(const ModelGraph& graph, const NamedEvidence& named);
// Throws on any evidence entry that does not fit its component.
void validate_evidence(const ModelGraph& graph, const EvidenceSet& evidence);

// Weighted sum over states: sum_i P(success | state_i) * P(state_i | data).
double condition_probability(const ComponentData& component, NodeId condition, std::span<const double> evidence);

// Success conditions combined through the component's gate; direct_p_success
// for components without conditions.
double component_probability(const ModelGraph& graph, NodeId component, const EvidenceSet& evidence);

PropagationResult propagate(const ModelGraph& graph, const EvidenceSet& evidence,
                            const PropagationConfig& config = {});

// Success conditions and condition-less components, in id order.
std::vector<NodeId> leaves(const ModelGraph& graph);
std::vector<NodeId> leaves_below(const ModelGraph& graph, NodeId node);

// Non-gate nodes reachable through more than one parent gate.
std::vector<NodeId> shared_nodes(const ModelGraph& graph);

using Assignment = std::map<NodeId, bool>;

// Boolean AND/OR evaluation from leaf truth values; one value per non-gate
// node. Throws UNCOVERED_LEAF if a leaf is missing from `assignment`.
std::map<NodeId, bool> evaluate_boolean(const ModelGraph& graph, const Assignment& assignment);

// Exact success probability of `node` by enumerating every outcome of the
// leaves below it as independent Bernoulli trials. Test oracle; throws
// LEAF_GUARD above kBruteForceLeafLimit leaves.
double brute_force_probability(const ModelGraph& graph, const EvidenceSet& evidence, NodeId node);

}  // namespace dml
