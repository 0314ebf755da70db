#include "dml/wire.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

namespace dml::wire {

namespace {

using json = nlohmann::ordered_json;

std::string finish(const json& j) { return j.dump() + "\n"; }

json issues_json(const std::vector<Issue>& issues) {
  json out = json::array();
  for (const Issue& i : issues) out.push_back(json{{"code", i.code}, {"path", i.path}, {"message", i.message}});
  return out;
}

}  // namespace

std::string render_counts(const ElementCounts& c) {
  return finish(json{{"goals", c.goals},
                     {"functions", c.functions},
                     {"subfunctions", c.subfunctions},
                     {"components", c.components},
                     {"gates", c.gates},
                     {"success_conditions", c.success_conditions}});
}

std::string render_report(const ValidationReport& report) {
  return finish(json{{"verdict", report.pass() ? "Pass" : "Fail"},
                     {"issues", issues_json(report.issues)},
                     {"warnings", issues_json(report.warnings)}});
}

std::string render_propagation(const ModelGraph& graph, const PropagationResult& result) {
  std::vector<const NodeProbability*> ordered;
  for (const NodeProbability& e : result.entries) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [&](const NodeProbability* a, const NodeProbability* b) {
    return std::tuple(a->kind, graph.qualified_name(a->id)) < std::tuple(b->kind, graph.qualified_name(b->id));
  });
  json out = json::array();
  for (const NodeProbability* e : ordered) {
    out.push_back(json{{"name", graph.qualified_name(e->id)},
                       {"kind", to_string(e->kind)},
                       {"p_success", e->p_success},
                       {"impacted", e->impacted}});
  }
  return finish(out);
}

std::string render_pathsets(const ModelGraph& graph, const PathSetCollection& collection) {
  json sets = json::array();
  for (const PathSet& s : collection.sets) {
    json names = json::array();
    for (NodeId id : s) names.push_back(graph.qualified_name(id));
    sets.push_back(std::move(names));
  }
  return finish(json{{"source", graph.qualified_name(collection.source)},
                     {"minimized", collection.minimized},
                     {"count", collection.sets.size()},
                     {"truncated", false},
                     {"pathsets", std::move(sets)}});
}

std::string render_subgraph(const Subgraph& subgraph) {
  std::map<NodeId, std::string> names;
  for (const SubgraphNode& n : subgraph.nodes) names[n.id] = n.name;

  json nodes = json::array();
  for (const SubgraphNode& n : subgraph.nodes) {
    json node{{"name", n.name}, {"kind", to_string(n.kind)}};
    if (n.data) {
      json states = json::object();
      for (const State& s : n.data->states) states[s.name] = s.prior;
      node["states"] = std::move(states);
      if (n.data->direct_p_success) node["direct_p_success"] = *n.data->direct_p_success;
    }
    if (n.p_success) node["p_success"] = *n.p_success;
    if (n.impacted) node["impacted"] = *n.impacted;
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const Edge& e : subgraph.edges) {
    edges.push_back(json{{"source", names.at(e.source)}, {"kind", to_string(e.kind)}, {"target", names.at(e.target)}});
  }
  return finish(json{{"root", names.at(subgraph.root)}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}});
}

std::string render_revision(std::uint64_t revision) { return finish(json{{"revision", revision}}); }

std::string render_error(const Error& error) { return render_error(error.code(), error.what(), error.path()); }

std::string render_error(std::string_view code, std::string_view message, std::string_view path) {
  json out{{"code", code}, {"message", message}};
  if (!path.empty()) out["path"] = path;
  return finish(out);
}

NamedEvidence parse_evidence(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error("MALFORMED_JSON", e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw Error("WRONG_TYPE", "evidence must be an object of components", "");
  NamedEvidence out;
  for (const auto& [component, dist] : doc.items()) {
    if (!dist.is_object()) throw Error("WRONG_TYPE", "distribution must be an object of states", component);
    auto& states = out[component];
    for (const auto& [state, p] : dist.items()) {
      if (!p.is_number()) throw Error("WRONG_TYPE", "probability must be a number", component + "." + state);
      states.push_back(NamedProbability{state, p.get<double>()});
    }
  }
  return out;
}

std::string warnings_header(const ModelGraph& graph, const std::vector<Warning>& warnings) {
  std::string out;
  for (const Warning& w : warnings) {
    if (!out.empty()) out += "; ";
    out += w.code + ":";
    for (std::size_t i = 0; i < w.nodes.size(); ++i) out += (i ? "," : "") + graph.qualified_name(w.nodes[i]);
  }
  return out;
}

}  // namespace dml::wire
