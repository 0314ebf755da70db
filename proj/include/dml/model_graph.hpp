#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dml {

enum class NodeKind : std::uint8_t {
  Goal,
  Function,
  Subfunction,
  Component,
  SuccessCondition,
  AndGate,
  OrGate,
};

enum class EdgeKind : std::uint8_t { AchievedBy, DependsOn, Requires, SuccessThrough };

enum class GateType : std::uint8_t { And, Or };

constexpr bool is_gate(NodeKind kind) noexcept {
  return kind == NodeKind::AndGate || kind == NodeKind::OrGate;
}

// Hierarchy tier: Goal = 0 ... SuccessCondition = 4. Gates have no tier.
constexpr std::optional<int> tier_of(NodeKind kind) noexcept {
  if (is_gate(kind)) return std::nullopt;
  return static_cast<int>(kind);
}

constexpr NodeKind gate_kind(GateType type) noexcept {
  return type == GateType::And ? NodeKind::AndGate : NodeKind::OrGate;
}

constexpr GateType gate_type(NodeKind kind) noexcept {
  return kind == NodeKind::OrGate ? GateType::Or : GateType::And;
}

std::string_view to_string(NodeKind kind) noexcept;
std::string_view to_string(EdgeKind kind) noexcept;
std::string_view to_string(GateType type) noexcept;  // "AND" / "OR"
std::optional<NodeKind> node_kind_from_string(std::string_view text) noexcept;

// Edge kind used between a non-gate node of `kind` and the gate below it.
EdgeKind edge_kind_to_gate(NodeKind parent) noexcept;
// Edge kind used between a gate and a child of `kind`.
EdgeKind edge_kind_from_gate(NodeKind child) noexcept;

struct NodeId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct State {
  std::string name;
  double prior = 0.0;
  friend bool operator==(const State&, const State&) = default;
};

// Per-component terms of the condition-probability sum: prior state
// distribution and the P(success_j | state_i) rows, one per success condition.
struct ComponentData {
  std::vector<State> states;
  std::map<NodeId, std::vector<double>> condition_matrix;
  std::optional<double> direct_p_success;

  std::optional<std::size_t> state_index(std::string_view name) const;
  std::vector<double> priors() const;
};

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::Goal;
  std::string name;                 // empty for gates
  std::optional<NodeId> owner;      // owning component of a success condition
  std::optional<ComponentData> data;  // set on components
};

struct Edge {
  NodeId source;
  EdgeKind kind = EdgeKind::AchievedBy;
  NodeId target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Typed DAG of the DML hierarchy. Immutable once built; use GraphBuilder.
// A ModelGraph may violate the structural rules (check_invariants reports
// them); operations documented as requiring a valid graph assume it does not.
class ModelGraph {
 public:
  ModelGraph() = default;

  // Assembles a graph from raw parts. Node ids must equal their positions.
  static ModelGraph from_parts(std::vector<Node> nodes, std::vector<Edge> edges);

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(NodeId id) const noexcept { return id.value < nodes_.size(); }
  const Node& node(NodeId id) const;  // throws NOT_FOUND

  // Targets of outgoing edges, in insertion order.
  std::span<const NodeId> successors(NodeId id) const;
  std::span<const NodeId> predecessors(NodeId id) const;

  std::optional<NodeId> goal() const noexcept;
  std::optional<NodeId> find(NodeKind kind, std::string_view name) const;
  std::optional<NodeId> find_condition(NodeId component, std::string_view name) const;

  // All non-gate nodes whose name (or "component/condition" qualified name)
  // equals `name`, across kinds.
  std::vector<NodeId> find_by_name(std::string_view name) const;

  // "component/condition" for success conditions, the plain name otherwise;
  // gates are rendered "<parent-name>_<AND|OR>".
  std::string qualified_name(NodeId id) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
};

// Structural equality: same typed nodes keyed by (kind, qualified name), same
// component data, same gate types and ordered child lists. Ids are ignored.
bool structurally_equal(const ModelGraph& a, const ModelGraph& b);
inline bool operator==(const ModelGraph& a, const ModelGraph& b) { return structurally_equal(a, b); }

class GraphBuilder {
 public:
  // Returns the existing node when (kind, name) was already added.
  NodeId add_node(NodeKind kind, std::string name);
  // Success conditions are scoped by their owning component.
  NodeId add_condition(NodeId component, std::string name);
  NodeId add_gate(GateType type);
  void add_edge(NodeId source, EdgeKind kind, NodeId target);

  // Gate below `parent`, created (with the typed parent edge) on first use.
  // Throws GATE_CONFLICT if an existing gate has the other type.
  NodeId gate_below(NodeId parent, GateType type);
  // Links child under parent's gate with edge kinds chosen by tier.
  void add_child(NodeId parent, GateType type, NodeId child);

  void set_component_data(NodeId component, ComponentData data);
  ComponentData& component_data(NodeId component);

  std::optional<NodeId> find(NodeKind kind, std::string_view name) const;
  std::optional<NodeId> find_condition(NodeId component, std::string_view name) const;
  std::optional<NodeId> gate_of(NodeId parent) const;

  ModelGraph build() const;

 private:
  struct Key {
    NodeKind kind;
    std::uint32_t owner;
    std::string name;
    friend auto operator<=>(const Key&, const Key&) = default;
  };
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<Key, NodeId> index_;
  std::map<std::uint32_t, NodeId> gates_;
};

// Gate interposed below `node` and that gate's children. Leaf components
// report no gate and no children.
struct GateChildren {
  std::optional<NodeId> gate;
  std::optional<GateType> type;
  std::vector<NodeId> children;
};

GateChildren children_of(const ModelGraph& graph, NodeId node);
std::optional<NodeId> gate_of(const ModelGraph& graph, NodeId node);

struct ElementCounts {
  std::size_t goals = 0;
  std::size_t functions = 0;
  std::size_t subfunctions = 0;
  std::size_t components = 0;
  std::size_t gates = 0;
  std::size_t success_conditions = 0;

  std::size_t total() const noexcept {
    return goals + functions + subfunctions + components + gates + success_conditions;
  }
  friend bool operator==(const ElementCounts&, const ElementCounts&) = default;
};

ElementCounts count_elements(const ModelGraph& graph);

struct Violation {
  std::string rule;  // GOAL_COUNT, GATE_MISSING, EDGE_TYPING, LEVEL_ORDER, ...
  std::string message;
  std::vector<NodeId> nodes;
};

std::vector<Violation> check_invariants(const ModelGraph& graph);
// Edge-typing subset of check_invariants, usable on graph fragments.
std::vector<Violation> check_edge_typing(const ModelGraph& graph);

// Every node (gates included) after all of its descendants; ties broken by id.
// Throws CYCLE_DETECTED on cyclic graphs.
std::vector<NodeId> bottom_up_order(const ModelGraph& graph);

}  // namespace dml

template <>
struct std::hash<dml::NodeId> {
  std::size_t operator()(dml::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
