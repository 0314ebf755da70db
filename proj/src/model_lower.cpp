#include <set>

#include <nlohmann/json.hpp>

#include "dml/model_io.hpp"

namespace dml {

namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kBranchKey[] = {"achieved_by", "depends_on", "requires", "success_through"};
constexpr std::string_view kListKey[] = {"", "functions", "subfunctions", "components", "success_conditions"};

class Lowering {
 public:
  NodeId lower(const ModelEntry& e, int tier) {
    const auto kind = static_cast<NodeKind>(tier);
    const std::string& name = e.ref ? *e.ref : *e.name;
    const NodeId id = builder_.add_node(kind, name);
    // A shared node is expanded at its first full definition only.
    if (e.ref || !expanded_.insert(id).second) return id;

    if (kind == NodeKind::Component) {
      lower_component(e, id);
      return id;
    }
    for (const ModelEntry& child : e.children) {
      const NodeId child_id = lower(child, tier + 1);
      builder_.add_child(id, *e.gate, child_id);
    }
    return id;
  }

  ModelGraph build() const { return builder_.build(); }

 private:
  void lower_component(const ModelEntry& e, NodeId id) {
    ComponentData data;
    if (e.states) {
      for (const auto& s : *e.states) data.states.push_back(State{s.name, s.value});
    } else {
      data.states.push_back(State{"operational", 1.0});
    }
    data.direct_p_success = e.direct_p_success;

    for (const ModelEntry& c : e.children) {
      const NodeId cond = builder_.add_condition(id, *c.name);
      builder_.add_child(id, *e.gate, cond);
      std::vector<double> row(data.states.size(), 0.0);
      for (const auto& g : *c.given_state) {
        if (auto i = data.state_index(g.name)) row[*i] = g.value;
      }
      data.condition_matrix[cond] = std::move(row);
    }
    builder_.set_component_data(id, std::move(data));
  }

  GraphBuilder builder_;
  std::set<NodeId> expanded_;
};

class Serializer {
 public:
  explicit Serializer(const ModelGraph& graph) : graph_(graph) {}

  json entry(NodeId id) {
    const Node& n = graph_.node(id);
    if (!emitted_.insert(id).second) return json{{"ref", n.name}};

    json out;
    out["name"] = n.name;
    const int tier = *tier_of(n.kind);
    const GateChildren below = children_of(graph_, id);

    if (n.kind == NodeKind::Component) {
      const ComponentData& data = *n.data;
      json states = json::object();
      for (const State& s : data.states) states[s.name] = s.prior;
      out["states"] = std::move(states);
      if (data.direct_p_success) out["direct_p_success"] = *data.direct_p_success;
      if (!below.gate) return out;

      json conditions = json::array();
      for (NodeId cond : below.children) {
        json given = json::object();
        const auto& row = data.condition_matrix.at(cond);
        for (std::size_t i = 0; i < data.states.size(); ++i) given[data.states[i].name] = row[i];
        conditions.push_back(json{{"name", graph_.node(cond).name}, {"given_state", std::move(given)}});
      }
      out["success_through"] = block(below.type, tier, std::move(conditions));
      return out;
    }

    json children = json::array();
    for (NodeId child : below.children) children.push_back(entry(child));
    out[std::string(kBranchKey[tier])] = block(below.type, tier, std::move(children));
    return out;
  }

 private:
  static json block(std::optional<GateType> type, int tier, json children) {
    json out = json::object();
    if (type) out["gate"] = *type == GateType::And ? "AND_gate" : "OR_gate";
    out[std::string(kListKey[tier + 1])] = std::move(children);
    return out;
  }

  const ModelGraph& graph_;
  std::set<NodeId> emitted_;
};

}  // namespace

ModelGraph to_graph(const HierarchicalModel& model) {
  ValidationReport report = validate_structure(model);
  if (!report.pass()) throw InvalidModelError(std::move(report));
  Lowering lowering;
  lowering.lower(model.goal, 0);
  return lowering.build();
}

ModelGraph load_model(std::string_view text) { return to_graph(parse_model(text)); }

std::string serialize_graph(const ModelGraph& graph) {
  const auto goal = graph.goal();
  if (!goal) throw Error("INVALID_GRAPH", "graph has no goal");
  json doc;
  doc["Goal"] = Serializer(graph).entry(*goal);
  return doc.dump(2) + "\n";
}

}  // namespace dml
