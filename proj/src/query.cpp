#include "dml/query.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dml/error.hpp"

namespace dml {

NodeId resolve_target(const ModelGraph& graph, std::string_view name, std::optional<NodeKind> kind) {
  std::vector<NodeId> matches = graph.find_by_name(name);
  if (kind) {
    std::erase_if(matches, [&](NodeId id) { return graph.node(id).kind != *kind; });
  }
  if (matches.empty()) throw Error("NOT_FOUND", "no node named '" + std::string(name) + "'", std::string(name));
  if (matches.size() > 1) {
    std::string kinds;
    for (NodeId id : matches) kinds += (kinds.empty() ? "" : ", ") + std::string(to_string(graph.node(id).kind));
    throw Error("AMBIGUOUS_NAME", "'" + std::string(name) + "' names several nodes (" + kinds + "); give a kind",
                std::string(name));
  }
  return matches.front();
}

ModelGraph Subgraph::to_graph() const {
  std::map<NodeId, NodeId> remap;
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[nodes[i].id] = NodeId{static_cast<std::uint32_t>(i)};
  std::vector<Node> out_nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const SubgraphNode& n = nodes[i];
    out_nodes.push_back(Node{NodeId{static_cast<std::uint32_t>(i)}, n.kind, n.name, std::nullopt, n.data});
  }
  std::vector<Edge> out_edges;
  for (const Edge& e : edges) out_edges.push_back(Edge{remap.at(e.source), e.kind, remap.at(e.target)});
  return ModelGraph::from_parts(std::move(out_nodes), std::move(out_edges));
}

Session::Session(PropagationConfig config) : config_(config) {}

std::uint64_t Session::load_model(ModelGraph model) {
  auto shared = std::make_shared<const ModelGraph>(std::move(model));
  std::unique_lock lock(mutex_);
  model_ = std::move(shared);
  evidence_.clear();
  return ++revision_;
}

std::uint64_t Session::set_evidence(const EvidenceSet& updates) {
  std::unique_lock lock(mutex_);
  if (!model_) throw Error("NO_MODEL", "no model loaded");
  validate_evidence(*model_, updates);
  for (const auto& [id, dist] : updates) evidence_[id] = dist;
  return ++revision_;
}

std::uint64_t Session::set_evidence(const NamedEvidence& updates) {
  std::unique_lock lock(mutex_);
  if (!model_) throw Error("NO_MODEL", "no model loaded");
  const EvidenceSet resolved = resolve_evidence(*model_, updates);
  for (const auto& [id, dist] : resolved) evidence_[id] = dist;
  return ++revision_;
}

std::uint64_t Session::reset_evidence() {
  std::unique_lock lock(mutex_);
  evidence_.clear();
  return ++revision_;
}

std::uint64_t Session::set_config(PropagationConfig config) {
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw Error("INVALID_THRESHOLD", "threshold must lie in [0,1]");
  }
  std::unique_lock lock(mutex_);
  config_ = config;
  return ++revision_;
}

std::uint64_t Session::revision() const {
  std::shared_lock lock(mutex_);
  return revision_;
}

bool Session::has_model() const {
  std::shared_lock lock(mutex_);
  return model_ != nullptr;
}

SessionSnapshot Session::snapshot() const {
  std::shared_lock lock(mutex_);
  return SessionSnapshot{model_, evidence_, config_, revision_};
}

SessionSnapshot Session::require_model() const {
  SessionSnapshot snap = snapshot();
  if (!snap.model) throw Error("NO_MODEL", "no model loaded");
  return snap;
}

NodeId Session::resolve(std::string_view name, std::optional<NodeKind> kind) const {
  return resolve_target(*require_model().model, name, kind);
}

PropagationResult Session::run_upward(const DiagnosticRequest& request) const {
  if (request.task != Task::UpwardReasoning) throw Error("WRONG_TASK", "request is not an upward-reasoning task");
  const SessionSnapshot snap = require_model();
  PropagationConfig config = snap.config;
  if (request.threshold) config.threshold = *request.threshold;
  try {
    PropagationResult result = propagate(*snap.model, snap.evidence, config);
    std::lock_guard lock(cache_mutex_);
    if (!last_upward_ || last_upward_->first <= snap.revision) last_upward_.emplace(snap.revision, result);
    return result;
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " (revision " + std::to_string(snap.revision) + ")", e.path());
  }
}

PathSetCollection Session::run_downward(const DiagnosticRequest& request) const {
  if (request.task != Task::DownwardReasoning) throw Error("WRONG_TASK", "request is not a downward-reasoning task");
  const SessionSnapshot snap = require_model();
  const NodeId target = resolve_target(*snap.model, request.target, request.kind);
  const Node& n = snap.model->node(target);
  if (n.kind == NodeKind::SuccessCondition || (n.kind == NodeKind::Component && !gate_of(*snap.model, target))) {
    throw Error("LEAF_TARGET", "'" + request.target + "' is a leaf; path-sets need a node with dependencies",
                request.target);
  }
  PathSetCollection raw = generate_pathsets(*snap.model, target, request.limit);
  return request.raw ? raw : minimize(std::move(raw));
}

Subgraph Session::retrieve_subgraph(std::string_view target, std::size_t depth, std::optional<NodeKind> kind) const {
  const SessionSnapshot snap = require_model();
  const ModelGraph& graph = *snap.model;
  const NodeId root = resolve_target(graph, target, kind);

  std::optional<PropagationResult> probabilities;
  {
    std::lock_guard lock(cache_mutex_);
    if (last_upward_ && last_upward_->first == snap.revision) probabilities = last_upward_->second;
  }

  std::set<NodeId> included{root};
  std::vector<NodeId> order{root};
  std::vector<Edge> edges;
  const auto include = [&](NodeId id) {
    if (included.insert(id).second) order.push_back(id);
  };
  const auto edge_between = [&](NodeId from, NodeId to) {
    for (const Edge& e : graph.edges()) {
      if (e.source == from && e.target == to) {
        edges.push_back(e);
        return;
      }
    }
  };

  if (depth >= 1) {
    for (NodeId gate : graph.predecessors(root)) {
      include(gate);
      edge_between(gate, root);
      for (NodeId parent : graph.predecessors(gate)) {
        include(parent);
        edge_between(parent, gate);
      }
    }
  }

  std::vector<NodeId> frontier{root};
  std::set<NodeId> expanded;
  for (std::size_t level = 0; level < depth && !frontier.empty(); ++level) {
    std::vector<NodeId> next;
    for (NodeId id : frontier) {
      if (!expanded.insert(id).second || graph.node(id).kind == NodeKind::SuccessCondition) continue;
      const GateChildren below = children_of(graph, id);
      if (!below.gate) continue;
      include(*below.gate);
      edge_between(id, *below.gate);
      for (NodeId child : below.children) {
        include(child);
        edge_between(*below.gate, child);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }

  Subgraph out;
  out.root = root;
  for (NodeId id : order) {
    const Node& n = graph.node(id);
    SubgraphNode node{id, n.kind, graph.qualified_name(id), n.data, std::nullopt, std::nullopt};
    if (probabilities && !is_gate(n.kind)) {
      const NodeProbability& p = probabilities->at(id);
      node.p_success = p.p_success;
      node.impacted = p.impacted;
    }
    out.nodes.push_back(std::move(node));
  }
  out.edges = std::move(edges);
  return out;
}

}  // namespace dml
