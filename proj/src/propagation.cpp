#include "dml/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "dml/error.hpp"

namespace dml {

namespace {

constexpr double kSumTolerance = 1e-6;

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", p);
  return buf;
}

const ComponentData& component_data(const ModelGraph& graph, NodeId id) {
  const Node& n = graph.node(id);
  if (n.kind != NodeKind::Component || !n.data) {
    throw Error("INVALID_NODE", "'" + graph.qualified_name(id) + "' is not a component", graph.qualified_name(id));
  }
  return *n.data;
}

std::span<const double> distribution_for(const ModelGraph& graph, NodeId component, const EvidenceSet& evidence,
                                         std::vector<double>& scratch) {
  if (auto it = evidence.find(component); it != evidence.end()) return it->second;
  scratch = component_data(graph, component).priors();
  return scratch;
}

void check_distribution(std::span<const double> dist, std::size_t states, const std::string& who) {
  if (dist.size() != states) {
    throw Error("STATE_MISMATCH",
                "distribution for '" + who + "' has " + std::to_string(dist.size()) + " entries, component has " +
                    std::to_string(states) + " states",
                who);
  }
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("PROBABILITY_RANGE", "state probability outside [0,1] for '" + who + "'", who);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error("PRIOR_SUM", "state distribution for '" + who + "' sums to " + format_probability(sum), who);
  }
}

double combine(GateType type, std::span<const double> children) {
  double product = 1.0;
  if (type == GateType::And) {
    for (double p : children) product *= p;
    return clamp01(product);
  }
  for (double p : children) product *= 1.0 - p;
  return clamp01(1.0 - product);
}

}  // namespace

const NodeProbability& PropagationResult::at(NodeId id) const {
  for (const NodeProbability& e : entries) {
    if (e.id == id) return e;
  }
  throw Error("NOT_FOUND", "no propagation entry for node " + std::to_string(id.value));
}

std::vector<double> resolve_distribution(const ComponentData& component, std::span<const NamedProbability> named,
                                         const std::string& component_name) {
  std::vector<double> out(component.states.size(), 0.0);
  for (const NamedProbability& p : named) {
    const auto index = component.state_index(p.name);
    if (!index) {
      throw Error("UNKNOWN_STATE", "component '" + component_name + "' has no state '" + p.name + "'",
                  component_name + "." + p.name);
    }
    out[*index] = p.value;
  }
  check_distribution(out, component.states.size(), component_name);
  return out;
}

EvidenceSet resolve_evidence(const ModelGraph& graph, const NamedEvidence& named) {
  EvidenceSet out;
  for (const auto& [name, dist] : named) {
    const auto id = graph.find(NodeKind::Component, name);
    if (!id) throw Error("UNKNOWN_COMPONENT", "no component named '" + name + "'", name);
    out[*id] = resolve_distribution(*graph.node(*id).data, dist, name);
  }
  return out;
}

void validate_evidence(const ModelGraph& graph, const EvidenceSet& evidence) {
  for (const auto& [id, dist] : evidence) {
    if (!graph.contains(id) || graph.node(id).kind != NodeKind::Component) {
      throw Error("UNKNOWN_COMPONENT", "evidence for node " + std::to_string(id.value) + " which is not a component");
    }
    check_distribution(dist, graph.node(id).data->states.size(), graph.node(id).name);
  }
}

double condition_probability(const ComponentData& component, NodeId condition, std::span<const double> evidence) {
  const auto row = component.condition_matrix.find(condition);
  if (row == component.condition_matrix.end()) {
    throw Error("UNKNOWN_CONDITION", "condition " + std::to_string(condition.value) + " does not belong to the component");
  }
  if (evidence.size() != component.states.size() || row->second.size() != evidence.size()) {
    throw Error("STATE_MISMATCH", "evidence does not match the component's states");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < evidence.size(); ++i) sum += row->second[i] * evidence[i];
  return clamp01(sum);
}

double component_probability(const ModelGraph& graph, NodeId component, const EvidenceSet& evidence) {
  const ComponentData& data = component_data(graph, component);
  const GateChildren below = children_of(graph, component);
  if (below.children.empty()) {
    if (!data.direct_p_success) {
      const std::string name = graph.qualified_name(component);
      throw Error("MISSING_SUCCESS_LOGIC", "component '" + name + "' has no success conditions and no direct_p_success",
                  name);
    }
    return clamp01(*data.direct_p_success);
  }
  std::vector<double> scratch;
  const auto dist = distribution_for(graph, component, evidence, scratch);
  std::vector<double> conditions;
  conditions.reserve(below.children.size());
  for (NodeId cond : below.children) conditions.push_back(condition_probability(data, cond, dist));
  return combine(*below.type, conditions);
}

PropagationResult propagate(const ModelGraph& graph, const EvidenceSet& evidence, const PropagationConfig& config) {
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw Error("INVALID_THRESHOLD", "threshold must lie in [0,1]");
  }
  validate_evidence(graph, evidence);

  PropagationResult result;
  result.threshold = config.threshold;

  std::vector<std::optional<double>> value(graph.size());
  const auto value_of = [&](NodeId id) {
    if (!value[id.value]) {
      throw Error("INVALID_GRAPH", "'" + graph.qualified_name(id) + "' evaluated out of tier order",
                  graph.qualified_name(id));
    }
    return *value[id.value];
  };

  // Tiers bottom-up: success conditions, components, subfunctions, functions,
  // goal. Each gate is evaluated together with the node above it.
  for (int tier = 4; tier >= 0; --tier) {
    const auto kind = static_cast<NodeKind>(tier);
    for (const Node& n : graph.nodes()) {
      if (n.kind != kind) continue;
      double p = 0.0;
      if (kind == NodeKind::SuccessCondition) {
        if (!n.owner) throw Error("INVALID_GRAPH", "success condition without component", n.name);
        std::vector<double> scratch;
        const auto dist = distribution_for(graph, *n.owner, evidence, scratch);
        p = condition_probability(component_data(graph, *n.owner), n.id, dist);
      } else {
        const GateChildren below = children_of(graph, n.id);
        if (below.gate) {
          std::vector<double> children;
          children.reserve(below.children.size());
          for (NodeId c : below.children) children.push_back(value_of(c));
          p = combine(*below.type, children);
        } else if (kind == NodeKind::Component) {
          p = component_probability(graph, n.id, evidence);
        } else {
          const std::string name = graph.qualified_name(n.id);
          throw Error("INCOMPLETE_MODEL", std::string(to_string(kind)) + " '" + name + "' has nothing below it", name);
        }
      }
      value[n.id.value] = p;
      result.entries.push_back(NodeProbability{n.id, n.kind, p, p < config.threshold});
    }
  }

  if (auto shared = shared_nodes(graph); !shared.empty()) {
    std::string names;
    for (NodeId id : shared) names += (names.empty() ? "" : ", ") + graph.qualified_name(id);
    result.warnings.push_back(Warning{"SHARED_DEPENDENCY",
                                      "shared nodes make gate products approximate (independence assumed): " + names,
                                      std::move(shared)});
  }
  return result;
}

std::vector<NodeId> leaves(const ModelGraph& graph) {
  std::vector<NodeId> out;
  for (const Node& n : graph.nodes()) {
    if (n.kind == NodeKind::SuccessCondition) {
      out.push_back(n.id);
    } else if (n.kind == NodeKind::Component && !gate_of(graph, n.id)) {
      out.push_back(n.id);
    }
  }
  return out;
}

std::vector<NodeId> leaves_below(const ModelGraph& graph, NodeId node) {
  std::set<NodeId> seen{node};
  std::vector<NodeId> stack{node};
  std::vector<NodeId> out;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = graph.node(id);
    if (n.kind == NodeKind::SuccessCondition || (n.kind == NodeKind::Component && !gate_of(graph, id))) {
      out.push_back(id);
      continue;
    }
    for (NodeId next : graph.successors(id)) {
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> shared_nodes(const ModelGraph& graph) {
  std::vector<NodeId> out;
  for (const Node& n : graph.nodes()) {
    if (!is_gate(n.kind) && graph.predecessors(n.id).size() > 1) out.push_back(n.id);
  }
  return out;
}

namespace {

// Boolean evaluation over a dense truth vector indexed by node id.
class BooleanEvaluator {
 public:
  explicit BooleanEvaluator(const ModelGraph& graph)
      : graph_(graph), order_(bottom_up_order(graph)), is_leaf_(graph.size(), 0) {
    for (NodeId id : leaves(graph)) is_leaf_[id.value] = 1;
  }

  bool is_leaf(NodeId id) const { return is_leaf_[id.value] != 0; }

  // `truth` holds the leaf values on entry and every node's value on exit.
  void run(std::vector<char>& truth) const {
    for (NodeId id : order_) {
      if (is_leaf(id)) continue;
      const Node& n = graph_.node(id);
      const auto succ = graph_.successors(id);
      if (is_gate(n.kind)) {
        const bool all = n.kind == NodeKind::AndGate;
        bool v = all;
        for (NodeId c : succ) {
          if (all) {
            v = v && truth[c.value];
          } else {
            v = v || truth[c.value];
          }
        }
        truth[id.value] = v;
      } else {
        // A non-leaf tier node takes the value of its gate.
        truth[id.value] = !succ.empty() && truth[succ.front().value];
      }
    }
  }

 private:
  const ModelGraph& graph_;
  std::vector<NodeId> order_;
  std::vector<char> is_leaf_;
};

}  // namespace

std::map<NodeId, bool> evaluate_boolean(const ModelGraph& graph, const Assignment& assignment) {
  const BooleanEvaluator evaluator(graph);
  std::vector<char> truth(graph.size(), 0);
  for (NodeId leaf : leaves(graph)) {
    const auto it = assignment.find(leaf);
    if (it == assignment.end()) {
      throw Error("UNCOVERED_LEAF", "no truth value for leaf '" + graph.qualified_name(leaf) + "'",
                  graph.qualified_name(leaf));
    }
    truth[leaf.value] = it->second;
  }
  evaluator.run(truth);
  std::map<NodeId, bool> out;
  for (const Node& n : graph.nodes()) {
    if (!is_gate(n.kind)) out[n.id] = truth[n.id.value] != 0;
  }
  return out;
}

double brute_force_probability(const ModelGraph& graph, const EvidenceSet& evidence, NodeId node) {
  const std::vector<NodeId> below = leaves_below(graph, node);
  if (below.size() > kBruteForceLeafLimit) {
    throw Error("LEAF_GUARD", std::to_string(below.size()) + " leaves below '" + graph.qualified_name(node) +
                                  "' exceed the enumeration limit of " + std::to_string(kBruteForceLeafLimit));
  }
  validate_evidence(graph, evidence);

  std::vector<double> p(below.size());
  for (std::size_t i = 0; i < below.size(); ++i) {
    const Node& leaf = graph.node(below[i]);
    if (leaf.kind == NodeKind::SuccessCondition) {
      std::vector<double> scratch;
      const auto dist = distribution_for(graph, *leaf.owner, evidence, scratch);
      p[i] = condition_probability(*graph.node(*leaf.owner).data, leaf.id, dist);
    } else {
      p[i] = leaf.data->direct_p_success.value_or(0.0);
    }
  }

  const BooleanEvaluator evaluator(graph);
  std::vector<char> truth(graph.size(), 0);
  double total = 0.0;
  const std::uint64_t outcomes = std::uint64_t{1} << below.size();
  for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
    double weight = 1.0;
    for (std::size_t i = 0; i < below.size(); ++i) {
      const bool on = (mask >> i) & 1U;
      truth[below[i].value] = on;
      weight *= on ? p[i] : 1.0 - p[i];
    }
    if (weight == 0.0) continue;
    evaluator.run(truth);
    if (truth[node.value]) total += weight;
  }
  return total;
}

}  // namespace dml
