#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dml/model_graph.hpp"
#include "dml/pathsets.hpp"
#include "dml/propagation.hpp"

namespace dml {

enum class Task { UpwardReasoning, DownwardReasoning, Explanatory };

struct DiagnosticRequest {
  Task task = Task::UpwardReasoning;
  std::string target;
  std::optional<NodeKind> kind;  // disambiguates names shared across kinds
  std::optional<double> threshold;
  std::size_t limit = kDefaultPathSetLimit;
  bool raw = false;
  std::size_t depth = 1;
};

struct SubgraphNode {
  NodeId id;  // id in the session model
  NodeKind kind = NodeKind::Goal;
  std::string name;  // qualified
  std::optional<ComponentData> data;
  std::optional<double> p_success;
  std::optional<bool> impacted;
};

// Fragment of the session model around a target: descendants down to `depth`
// tiers plus one parent hop. Every edge's endpoints are included.
struct Subgraph {
  NodeId root;
  std::vector<SubgraphNode> nodes;
  std::vector<Edge> edges;

  // Standalone graph with renumbered ids, for structural checks.
  ModelGraph to_graph() const;
};

// Consistent view of a session at one revision.
struct SessionSnapshot {
  std::shared_ptr<const ModelGraph> model;
  EvidenceSet evidence;
  PropagationConfig config;
  std::uint64_t revision = 0;
};

// Binds a model to evidence and configuration. Mutations are serialized and
// bump the revision; reads work on snapshots and never change it.
class Session {
 public:
  explicit Session(PropagationConfig config = {});

  std::uint64_t load_model(ModelGraph model);
  std::uint64_t set_evidence(const EvidenceSet& updates);
  std::uint64_t set_evidence(const NamedEvidence& updates);
  std::uint64_t reset_evidence();
  std::uint64_t set_config(PropagationConfig config);

  std::uint64_t revision() const;
  bool has_model() const;
  SessionSnapshot snapshot() const;

  // Throws NO_MODEL, NOT_FOUND or AMBIGUOUS_NAME.
  NodeId resolve(std::string_view name, std::optional<NodeKind> kind = std::nullopt) const;

  PropagationResult run_upward(const DiagnosticRequest& request) const;
  PathSetCollection run_downward(const DiagnosticRequest& request) const;
  Subgraph retrieve_subgraph(std::string_view target, std::size_t depth,
                             std::optional<NodeKind> kind = std::nullopt) const;

 private:
  SessionSnapshot require_model() const;

  mutable std::shared_mutex mutex_;
  std::shared_ptr<const ModelGraph> model_;
  EvidenceSet evidence_;
  PropagationConfig config_;
  std::uint64_t revision_ = 0;

  // Last upward result computed at the current revision, shown on subgraphs.
  mutable std::mutex cache_mutex_;
  mutable std::optional<std::pair<std::uint64_t, PropagationResult>> last_upward_;
};

NodeId resolve_target(const ModelGraph& graph, std::string_view name, std::optional<NodeKind> kind = std::nullopt);

}  // namespace dml
