#include "dml/pathsets.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "dml/error.hpp"

namespace dml {

namespace {

using Collection = std::vector<PathSet>;

PathSet unite(const PathSet& a, const PathSet& b) {
  PathSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

class Generator {
 public:
  Generator(const ModelGraph& graph, std::size_t limit) : graph_(graph), limit_(limit) {}

  const Collection& expand(NodeId id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    return memo_.emplace(id, compute(id)).first->second;
  }

 private:
  [[noreturn]] void explode(NodeId id, std::size_t reached) const {
    throw Error("PATHSET_EXPLOSION",
                "expanding '" + graph_.qualified_name(id) + "' reaches " + std::to_string(reached) +
                    " path-sets, above the limit of " + std::to_string(limit_),
                std::to_string(limit_));
  }

  Collection compute(NodeId id) {
    const GateChildren below = children_of(graph_, id);
    if (!below.gate || below.children.empty()) return {PathSet{id}};

    if (graph_.node(id).kind == NodeKind::Component) {
      // Conditions are leaves: AND needs all of them, OR any one.
      if (*below.type == GateType::And) {
        PathSet all(below.children.begin(), below.children.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        return {std::move(all)};
      }
      Collection out;
      for (NodeId c : below.children) out.push_back(PathSet{c});
      return out;
    }

    std::vector<const Collection*> parts;
    for (NodeId child : below.children) parts.push_back(&expand(child));

    if (*below.type == GateType::Or) {
      std::size_t total = 0;
      for (const Collection* part : parts) total += part->size();
      if (total > limit_) explode(id, total);
      Collection out;
      out.reserve(total);
      for (const Collection* part : parts) out.insert(out.end(), part->begin(), part->end());
      return out;
    }

    std::size_t total = 1;
    for (const Collection* part : parts) {
      if (part->empty()) return {};
      if (total > std::numeric_limits<std::size_t>::max() / part->size()) explode(id, std::numeric_limits<std::size_t>::max());
      total *= part->size();
    }
    if (total > limit_) explode(id, total);

    // First child varies slowest.
    Collection out{PathSet{}};
    for (const Collection* part : parts) {
      Collection next;
      next.reserve(out.size() * part->size());
      for (const PathSet& prefix : out) {
        for (const PathSet& s : *part) next.push_back(unite(prefix, s));
      }
      out = std::move(next);
    }
    return out;
  }

  const ModelGraph& graph_;
  std::size_t limit_;
  std::map<NodeId, Collection> memo_;
};

}  // namespace

PathSetCollection generate_pathsets(const ModelGraph& graph, NodeId node, std::size_t limit) {
  const Node& n = graph.node(node);
  if (n.kind == NodeKind::SuccessCondition) {
    throw Error("LEAF_TARGET", "'" + graph.qualified_name(node) + "' is a success condition", graph.qualified_name(node));
  }
  if (is_gate(n.kind)) throw Error("INVALID_TARGET", "path-sets are generated for tier nodes, not gates");
  if (limit == 0) throw Error("INVALID_LIMIT", "path-set limit must be positive");

  Generator generator(graph, limit);
  PathSetCollection out;
  out.source = node;
  out.sets = generator.expand(node);
  return out;
}

PathSetCollection minimize(PathSetCollection collection) {
  auto& sets = collection.sets;
  for (PathSet& s : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  std::sort(sets.begin(), sets.end(), [](const PathSet& a, const PathSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());

  std::vector<PathSet> kept;
  for (PathSet& candidate : sets) {
    const bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const PathSet& k) {
      return std::includes(candidate.begin(), candidate.end(), k.begin(), k.end());
    });
    if (!absorbed) kept.push_back(std::move(candidate));
  }
  sets = std::move(kept);
  collection.minimized = true;
  return collection;
}

}  // namespace dml
