#include "dml/model_graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dml/error.hpp"

namespace dml {

namespace {

constexpr double kSumTolerance = 1e-6;

bool edge_allowed(NodeKind src, EdgeKind kind, NodeKind dst) {
  const bool src_gate = is_gate(src);
  const bool dst_gate = is_gate(dst);
  switch (kind) {
    case EdgeKind::AchievedBy:
      return src == NodeKind::Goal && dst_gate;
    case EdgeKind::DependsOn:
      return (src_gate && dst == NodeKind::Function) || (src == NodeKind::Function && dst_gate);
    case EdgeKind::Requires:
      return (src_gate && dst == NodeKind::Subfunction) || (src == NodeKind::Subfunction && dst_gate) ||
             (src_gate && dst == NodeKind::Component);
    case EdgeKind::SuccessThrough:
      return (src == NodeKind::Component && dst_gate) || (src_gate && dst == NodeKind::SuccessCondition);
  }
  return false;
}

std::string describe(const ModelGraph& graph, NodeId id) {
  if (!graph.contains(id)) return "#" + std::to_string(id.value);
  std::string out(to_string(graph.node(id).kind));
  out += " '" + graph.qualified_name(id) + "'";
  return out;
}

void add_violation(std::vector<Violation>& out, std::string rule, std::string message,
                   std::vector<NodeId> nodes) {
  out.push_back(Violation{std::move(rule), std::move(message), std::move(nodes)});
}

void check_component_data(const ModelGraph& graph, const Node& node, std::vector<Violation>& out) {
  if (!node.data) {
    add_violation(out, "COMPONENT_DATA", describe(graph, node.id) + " has no component data", {node.id});
    return;
  }
  const ComponentData& data = *node.data;
  const auto rule = [&](const std::string& msg) { add_violation(out, "COMPONENT_DATA", describe(graph, node.id) + ": " + msg, {node.id}); };

  if (data.states.empty()) rule("no operational states");
  double sum = 0.0;
  std::set<std::string> names;
  for (const State& s : data.states) {
    if (!(s.prior >= 0.0 && s.prior <= 1.0)) rule("prior of state '" + s.name + "' outside [0,1]");
    if (!names.insert(s.name).second) rule("duplicate state '" + s.name + "'");
    sum += s.prior;
  }
  if (!data.states.empty() && std::abs(sum - 1.0) > kSumTolerance) rule("state priors sum to " + std::to_string(sum));

  const GateChildren below = children_of(graph, node.id);
  std::set<NodeId> conditions(below.children.begin(), below.children.end());
  for (const auto& [cond, row] : data.condition_matrix) {
    if (!conditions.count(cond)) rule("likelihood row for a condition that is not below the component");
    if (row.size() != data.states.size()) rule("likelihood row length differs from state count");
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) rule("likelihood outside [0,1]");
    }
  }
  for (NodeId cond : conditions) {
    if (!graph.contains(cond) || graph.node(cond).kind != NodeKind::SuccessCondition) continue;
    if (!data.condition_matrix.count(cond)) rule("no likelihood row for " + describe(graph, cond));
    if (graph.node(cond).owner != node.id) rule(describe(graph, cond) + " is owned by another component");
  }
  if (!below.gate) {
    if (!data.direct_p_success) {
      rule("no success conditions and no direct success probability");
    } else if (!(*data.direct_p_success >= 0.0 && *data.direct_p_success <= 1.0)) {
      rule("direct success probability outside [0,1]");
    }
  }
}

}  // namespace

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Goal: return "Goal";
    case NodeKind::Function: return "Function";
    case NodeKind::Subfunction: return "Subfunction";
    case NodeKind::Component: return "Component";
    case NodeKind::SuccessCondition: return "SuccessCondition";
    case NodeKind::AndGate: return "AndGate";
    case NodeKind::OrGate: return "OrGate";
  }
  return "?";
}

std::string_view to_string(EdgeKind kind) noexcept {
  switch (kind) {
    case EdgeKind::AchievedBy: return "ACHIEVED_BY";
    case EdgeKind::DependsOn: return "DEPENDS_ON";
    case EdgeKind::Requires: return "REQUIRES";
    case EdgeKind::SuccessThrough: return "SUCCESS_THROUGH";
  }
  return "?";
}

std::string_view to_string(GateType type) noexcept { return type == GateType::And ? "AND" : "OR"; }

std::optional<NodeKind> node_kind_from_string(std::string_view text) noexcept {
  for (auto kind : {NodeKind::Goal, NodeKind::Function, NodeKind::Subfunction, NodeKind::Component,
                    NodeKind::SuccessCondition, NodeKind::AndGate, NodeKind::OrGate}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

EdgeKind edge_kind_to_gate(NodeKind parent) noexcept {
  switch (parent) {
    case NodeKind::Goal: return EdgeKind::AchievedBy;
    case NodeKind::Function: return EdgeKind::DependsOn;
    case NodeKind::Subfunction: return EdgeKind::Requires;
    default: return EdgeKind::SuccessThrough;
  }
}

EdgeKind edge_kind_from_gate(NodeKind child) noexcept {
  switch (child) {
    case NodeKind::Function: return EdgeKind::DependsOn;
    case NodeKind::Subfunction:
    case NodeKind::Component: return EdgeKind::Requires;
    default: return EdgeKind::SuccessThrough;
  }
}

std::optional<std::size_t> ComponentData::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<double> ComponentData::priors() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const State& s : states) out.push_back(s.prior);
  return out;
}

// ---------------------------------------------------------------------------
// ModelGraph

ModelGraph ModelGraph::from_parts(std::vector<Node> nodes, std::vector<Edge> edges) {
  ModelGraph g;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.value != i) throw Error("INVALID_GRAPH", "node ids must match their positions");
  }
  g.nodes_ = std::move(nodes);
  g.out_.resize(g.nodes_.size());
  g.in_.resize(g.nodes_.size());
  for (const Edge& e : edges) {
    if (!g.contains(e.source) || !g.contains(e.target)) throw Error("INVALID_GRAPH", "edge endpoint out of range");
    g.out_[e.source.value].push_back(e.target);
    g.in_[e.target.value].push_back(e.source);
  }
  g.edges_ = std::move(edges);
  return g;
}

const Node& ModelGraph::node(NodeId id) const {
  if (!contains(id)) throw Error("NOT_FOUND", "unknown node id " + std::to_string(id.value));
  return nodes_[id.value];
}

std::span<const NodeId> ModelGraph::successors(NodeId id) const {
  if (!contains(id)) throw Error("NOT_FOUND", "unknown node id " + std::to_string(id.value));
  return out_[id.value];
}

std::span<const NodeId> ModelGraph::predecessors(NodeId id) const {
  if (!contains(id)) throw Error("NOT_FOUND", "unknown node id " + std::to_string(id.value));
  return in_[id.value];
}

std::optional<NodeId> ModelGraph::goal() const noexcept {
  for (const Node& n : nodes_) {
    if (n.kind == NodeKind::Goal) return n.id;
  }
  return std::nullopt;
}

std::optional<NodeId> ModelGraph::find(NodeKind kind, std::string_view name) const {
  for (const Node& n : nodes_) {
    if (n.kind == kind && n.name == name && kind != NodeKind::SuccessCondition) return n.id;
  }
  return std::nullopt;
}

std::optional<NodeId> ModelGraph::find_condition(NodeId component, std::string_view name) const {
  for (const Node& n : nodes_) {
    if (n.kind == NodeKind::SuccessCondition && n.owner == component && n.name == name) return n.id;
  }
  return std::nullopt;
}

std::vector<NodeId> ModelGraph::find_by_name(std::string_view name) const {
  std::vector<NodeId> out;
  for (const Node& n : nodes_) {
    if (is_gate(n.kind)) continue;
    if (n.name == name || (n.kind == NodeKind::SuccessCondition && qualified_name(n.id) == name)) {
      out.push_back(n.id);
    }
  }
  return out;
}

std::string ModelGraph::qualified_name(NodeId id) const {
  const Node& n = node(id);
  if (n.kind == NodeKind::SuccessCondition && n.owner && contains(*n.owner)) {
    return nodes_[n.owner->value].name + "/" + n.name;
  }
  if (is_gate(n.kind)) {
    const std::string suffix(to_string(gate_type(n.kind)));
    if (in_[id.value].empty()) return "gate" + std::to_string(id.value) + "_" + suffix;
    return qualified_name(in_[id.value].front()) + "_" + suffix;
  }
  return n.name;
}

namespace {

std::string canonical_key(const ModelGraph& g, NodeId id) {
  const Node& n = g.node(id);
  return std::string(to_string(n.kind)) + ":" + g.qualified_name(id);
}

bool same_data(const ModelGraph& ga, const ComponentData& a, const ModelGraph& gb, const ComponentData& b) {
  if (a.states != b.states || a.direct_p_success != b.direct_p_success) return false;
  if (a.condition_matrix.size() != b.condition_matrix.size()) return false;
  std::map<std::string, std::vector<double>> ra;
  std::map<std::string, std::vector<double>> rb;
  for (const auto& [id, row] : a.condition_matrix) ra[ga.qualified_name(id)] = row;
  for (const auto& [id, row] : b.condition_matrix) rb[gb.qualified_name(id)] = row;
  return ra == rb;
}

}  // namespace

bool structurally_equal(const ModelGraph& a, const ModelGraph& b) {
  if (a.size() != b.size() || a.edges().size() != b.edges().size()) return false;

  std::map<std::string, NodeId> index_b;
  for (const Node& n : b.nodes()) {
    if (!is_gate(n.kind)) index_b.emplace(canonical_key(b, n.id), n.id);
  }
  for (const Node& na : a.nodes()) {
    if (is_gate(na.kind)) continue;
    auto it = index_b.find(canonical_key(a, na.id));
    if (it == index_b.end()) return false;
    const Node& nb = b.node(it->second);
    if (na.data.has_value() != nb.data.has_value()) return false;
    if (na.data && !same_data(a, *na.data, b, *nb.data)) return false;
    if (na.kind == NodeKind::SuccessCondition) continue;

    const GateChildren ca = children_of(a, na.id);
    const GateChildren cb = children_of(b, nb.id);
    if (ca.type != cb.type || ca.children.size() != cb.children.size()) return false;
    for (std::size_t i = 0; i < ca.children.size(); ++i) {
      if (canonical_key(a, ca.children[i]) != canonical_key(b, cb.children[i])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// GraphBuilder

NodeId GraphBuilder::add_node(NodeKind kind, std::string name) {
  if (is_gate(kind)) return add_gate(gate_type(kind));
  if (kind == NodeKind::SuccessCondition) {
    throw Error("INVALID_NODE", "success conditions must be added with add_condition");
  }
  Key key{kind, 0, name};
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  Node node{id, kind, std::move(name), std::nullopt, std::nullopt};
  if (kind == NodeKind::Component) node.data = ComponentData{};
  nodes_.push_back(std::move(node));
  index_.emplace(std::move(key), id);
  return id;
}

NodeId GraphBuilder::add_condition(NodeId component, std::string name) {
  Key key{NodeKind::SuccessCondition, component.value, name};
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back(Node{id, NodeKind::SuccessCondition, std::move(name), component, std::nullopt});
  index_.emplace(std::move(key), id);
  return id;
}

NodeId GraphBuilder::add_gate(GateType type) {
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back(Node{id, gate_kind(type), {}, std::nullopt, std::nullopt});
  return id;
}

void GraphBuilder::add_edge(NodeId source, EdgeKind kind, NodeId target) {
  if (source.value >= nodes_.size() || target.value >= nodes_.size()) {
    throw Error("NOT_FOUND", "edge endpoint does not exist");
  }
  edges_.push_back(Edge{source, kind, target});
}

NodeId GraphBuilder::gate_below(NodeId parent, GateType type) {
  if (auto it = gates_.find(parent.value); it != gates_.end()) {
    if (nodes_[it->second.value].kind != gate_kind(type)) {
      throw Error("GATE_CONFLICT", "node '" + nodes_[parent.value].name + "' already has a gate of the other type");
    }
    return it->second;
  }
  const NodeId gate = add_gate(type);
  add_edge(parent, edge_kind_to_gate(nodes_.at(parent.value).kind), gate);
  gates_.emplace(parent.value, gate);
  return gate;
}

void GraphBuilder::add_child(NodeId parent, GateType type, NodeId child) {
  const NodeId gate = gate_below(parent, type);
  add_edge(gate, edge_kind_from_gate(nodes_.at(child.value).kind), child);
}

void GraphBuilder::set_component_data(NodeId component, ComponentData data) {
  component_data(component) = std::move(data);
}

ComponentData& GraphBuilder::component_data(NodeId component) {
  Node& n = nodes_.at(component.value);
  if (n.kind != NodeKind::Component) throw Error("INVALID_NODE", "'" + n.name + "' is not a component");
  if (!n.data) n.data = ComponentData{};
  return *n.data;
}

std::optional<NodeId> GraphBuilder::find(NodeKind kind, std::string_view name) const {
  auto it = index_.find(Key{kind, 0, std::string(name)});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> GraphBuilder::find_condition(NodeId component, std::string_view name) const {
  auto it = index_.find(Key{NodeKind::SuccessCondition, component.value, std::string(name)});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> GraphBuilder::gate_of(NodeId parent) const {
  auto it = gates_.find(parent.value);
  if (it == gates_.end()) return std::nullopt;
  return it->second;
}

ModelGraph GraphBuilder::build() const { return ModelGraph::from_parts(nodes_, edges_); }

// ---------------------------------------------------------------------------
// Queries

std::optional<NodeId> gate_of(const ModelGraph& graph, NodeId node) {
  for (NodeId next : graph.successors(node)) {
    if (is_gate(graph.node(next).kind)) return next;
  }
  return std::nullopt;
}

GateChildren children_of(const ModelGraph& graph, NodeId node) {
  const Node& n = graph.node(node);
  if (n.kind == NodeKind::SuccessCondition) {
    throw Error("LEAF_NODE", "success condition '" + graph.qualified_name(node) + "' has no children");
  }
  if (is_gate(n.kind)) throw Error("INVALID_NODE", "gate nodes are not hierarchy tiers");
  GateChildren out;
  out.gate = gate_of(graph, node);
  if (out.gate) {
    out.type = gate_type(graph.node(*out.gate).kind);
    const auto kids = graph.successors(*out.gate);
    out.children.assign(kids.begin(), kids.end());
  }
  return out;
}

ElementCounts count_elements(const ModelGraph& graph) {
  ElementCounts c;
  for (const Node& n : graph.nodes()) {
    switch (n.kind) {
      case NodeKind::Goal: ++c.goals; break;
      case NodeKind::Function: ++c.functions; break;
      case NodeKind::Subfunction: ++c.subfunctions; break;
      case NodeKind::Component: ++c.components; break;
      case NodeKind::SuccessCondition: ++c.success_conditions; break;
      case NodeKind::AndGate:
      case NodeKind::OrGate: ++c.gates; break;
    }
  }
  return c;
}

std::vector<NodeId> bottom_up_order(const ModelGraph& graph) {
  // Iterative post-order DFS from every root, then from any remaining node.
  enum class Mark : std::uint8_t { New, Open, Done };
  std::vector<Mark> mark(graph.size(), Mark::New);
  std::vector<NodeId> order;
  order.reserve(graph.size());

  for (const Node& start : graph.nodes()) {
    if (mark[start.id.value] != Mark::New) continue;
    std::vector<std::pair<NodeId, std::size_t>> stack{{start.id, 0}};
    mark[start.id.value] = Mark::Open;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto succ = graph.successors(id);
      if (next < succ.size()) {
        const NodeId child = succ[next++];
        if (mark[child.value] == Mark::Open) {
          throw Error("CYCLE_DETECTED", "cycle through " + describe(graph, child));
        }
        if (mark[child.value] == Mark::New) {
          mark[child.value] = Mark::Open;
          stack.emplace_back(child, 0);
        }
      } else {
        mark[id.value] = Mark::Done;
        order.push_back(id);
        stack.pop_back();
      }
    }
  }
  return order;
}

std::vector<Violation> check_edge_typing(const ModelGraph& graph) {
  std::vector<Violation> out;
  std::set<std::tuple<std::uint32_t, std::uint32_t>> seen;
  for (const Edge& e : graph.edges()) {
    const NodeKind src = graph.node(e.source).kind;
    const NodeKind dst = graph.node(e.target).kind;
    const std::string what = describe(graph, e.source) + " -" + std::string(to_string(e.kind)) + "-> " +
                             describe(graph, e.target);
    if (!seen.emplace(e.source.value, e.target.value).second) {
      add_violation(out, "DUPLICATE_EDGE", "repeated edge " + what, {e.source, e.target});
    }
    if (!is_gate(src) && !is_gate(dst)) {
      add_violation(out, "GATE_MISSING", "no gate between " + what, {e.source, e.target});
    } else if (!edge_allowed(src, e.kind, dst)) {
      add_violation(out, "EDGE_TYPING", "edge kind not allowed: " + what, {e.source, e.target});
    }
  }
  return out;
}

std::vector<Violation> check_invariants(const ModelGraph& graph) {
  std::vector<Violation> out = check_edge_typing(graph);

  std::vector<NodeId> goals;
  for (const Node& n : graph.nodes()) {
    if (n.kind == NodeKind::Goal) goals.push_back(n.id);
  }
  if (goals.size() != 1) {
    add_violation(out, "GOAL_COUNT", "expected exactly one goal, found " + std::to_string(goals.size()), goals);
  }

  // Cycles: colour DFS; report each back edge once.
  {
    enum class Mark : std::uint8_t { New, Open, Done };
    std::vector<Mark> mark(graph.size(), Mark::New);
    for (const Node& start : graph.nodes()) {
      if (mark[start.id.value] != Mark::New) continue;
      std::vector<std::pair<NodeId, std::size_t>> stack{{start.id, 0}};
      mark[start.id.value] = Mark::Open;
      while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const auto succ = graph.successors(id);
        if (next < succ.size()) {
          const NodeId child = succ[next++];
          if (mark[child.value] == Mark::Open) {
            std::vector<NodeId> cycle;
            for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
              cycle.push_back(it->first);
              if (it->first == child) break;
            }
            add_violation(out, "CYCLE_DETECTED", "cycle through " + describe(graph, child), std::move(cycle));
          } else if (mark[child.value] == Mark::New) {
            mark[child.value] = Mark::Open;
            stack.emplace_back(child, 0);
          }
        } else {
          mark[id.value] = Mark::Done;
          stack.pop_back();
        }
      }
    }
  }

  // Reachability from the goal.
  if (goals.size() == 1) {
    std::vector<bool> seen(graph.size(), false);
    std::vector<NodeId> frontier{goals.front()};
    seen[goals.front().value] = true;
    while (!frontier.empty()) {
      const NodeId id = frontier.back();
      frontier.pop_back();
      for (NodeId next : graph.successors(id)) {
        if (!seen[next.value]) {
          seen[next.value] = true;
          frontier.push_back(next);
        }
      }
    }
    for (const Node& n : graph.nodes()) {
      if (!seen[n.id.value] && !is_gate(n.kind) && n.kind != NodeKind::Goal) {
        add_violation(out, "UNREACHABLE", describe(graph, n.id) + " is not reachable from the goal", {n.id});
      }
    }
  }

  for (const Node& n : graph.nodes()) {
    const auto succ = graph.successors(n.id);
    const auto pred = graph.predecessors(n.id);
    if (is_gate(n.kind)) {
      if (pred.size() != 1) {
        add_violation(out, "GATE_PARENT",
                      describe(graph, n.id) + " has " + std::to_string(pred.size()) + " parents, expected 1", {n.id});
      }
      if (succ.empty()) add_violation(out, "GATE_CHILDREN", describe(graph, n.id) + " has no children", {n.id});
      if (pred.size() == 1) {
        const auto parent_tier = tier_of(graph.node(pred.front()).kind);
        for (NodeId child : succ) {
          const auto child_tier = tier_of(graph.node(child).kind);
          if (parent_tier && child_tier && *child_tier != *parent_tier + 1) {
            add_violation(out, "LEVEL_ORDER",
                          describe(graph, child) + " placed directly below " + describe(graph, pred.front()),
                          {pred.front(), n.id, child});
          }
        }
      }
      continue;
    }
    if (succ.size() > 1) {
      add_violation(out, "MULTIPLE_GATES", describe(graph, n.id) + " has more than one outgoing edge", {n.id});
    }
    if ((n.kind == NodeKind::Function || n.kind == NodeKind::Subfunction) && succ.empty()) {
      add_violation(out, "LEAF_TIER", describe(graph, n.id) + " has no gate below it", {n.id});
    }
    if (n.kind == NodeKind::Component) check_component_data(graph, n, out);
    if (n.kind == NodeKind::SuccessCondition && (!n.owner || !graph.contains(*n.owner) ||
                                                 graph.node(*n.owner).kind != NodeKind::Component)) {
      add_violation(out, "COMPONENT_DATA", describe(graph, n.id) + " has no owning component", {n.id});
    }
  }
  return out;
}

}  // namespace dml
