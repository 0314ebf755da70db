#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "dml/error.hpp"
#include "dml/model_io.hpp"
#include "random_models.hpp"

namespace dml {
namespace {

using json = nlohmann::ordered_json;
using testing::random_model;
using testing::read_text;
using testing::source_path;

std::string fixture_text() { return read_text(source_path("fixtures/aux_feedwater.json")); }

std::string parse_error_code(std::string_view text) {
  try {
    parse_model(text);
  } catch (const ModelParseError& e) {
    return e.code();
  }
  return "";
}

json leaf_component(const std::string& name) {
  return json{{"name", name}, {"states", {{"operational", 1.0}}}, {"direct_p_success", 1.0}};
}

json one_chain(json components) {
  json sub = json::object();
  sub["name"] = "S";
  sub["requires"] = json{{"gate", "AND_gate"}, {"components", std::move(components)}};
  json fn = json::object();
  fn["name"] = "F";
  fn["depends_on"] = json{{"gate", "AND_gate"}, {"subfunctions", json::array({sub})}};
  json goal = json::object();
  goal["name"] = "G";
  goal["achieved_by"] = json{{"gate", "AND_gate"}, {"functions", json::array({fn})}};
  return json{{"Goal", goal}};
}

json second_subfunction_ref(const std::string& name) {
  json ref = json::object();
  ref["ref"] = name;
  json sub = json::object();
  sub["name"] = "S2";
  sub["requires"] = json{{"gate", "OR_gate"}, {"components", json::array({ref})}};
  return sub;
}

TEST(ParseModel, FixtureHasFourFunctions) {
  const HierarchicalModel m = parse_model(fixture_text());
  EXPECT_EQ(*m.goal.name, "Ensure safe and effective operation of the system");
  ASSERT_EQ(m.goal.children.size(), 4u);
  EXPECT_EQ(*m.goal.children[0].name, "Supply Feedwater");
  EXPECT_EQ(*m.goal.children[1].name, "Control Water Flow");
  EXPECT_TRUE(m.warnings.empty());
}

TEST(ParseModel, EmptyObjectMissesGoal) {
  try {
    parse_model("{}");
    FAIL();
  } catch (const ModelParseError& e) {
    EXPECT_EQ(e.code(), "MISSING_FIELD");
    EXPECT_EQ(e.path(), "goal");
  }
}

TEST(ParseModel, XorGateIsRejected) {
  json doc = one_chain(json::array({leaf_component("C")}));
  doc["Goal"]["achieved_by"]["gate"] = "XOR_gate";
  EXPECT_EQ(parse_error_code(doc.dump()), "INVALID_GATE");
}

TEST(ParseModel, MalformedJsonReportsPosition) {
  try {
    parse_model("{\"Goal\": {\"name\": \"G\",,}}");
    FAIL();
  } catch (const ModelParseError& e) {
    EXPECT_EQ(e.code(), "MALFORMED_JSON");
    EXPECT_EQ(e.path().rfind("byte ", 0), 0u);
  }
}

TEST(ParseModel, StrictModeRejectsUnknownAndMistypedKeys) {
  json doc = one_chain(json::array({leaf_component("C")}));
  doc["Goal"]["colour"] = "blue";
  EXPECT_EQ(parse_error_code(doc.dump()), "UNKNOWN_KEY");

  doc = one_chain(json::array({leaf_component("C")}));
  doc["Goal"]["name"] = 7;
  EXPECT_EQ(parse_error_code(doc.dump()), "WRONG_TYPE");
}

TEST(ParseModel, NotApplicableEntriesAreDroppedWithAWarning) {
  json doc = one_chain(json::array({leaf_component("C"), "N/A"}));
  const HierarchicalModel m = parse_model(doc.dump());
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_EQ(m.warnings[0].code, "NA_DROPPED");
  EXPECT_TRUE(validate_structure(m).pass());
}

TEST(ValidateStructure, FixturePasses) {
  const ValidationReport r = validate_structure(parse_model(fixture_text()));
  for (const Issue& i : r.issues) ADD_FAILURE() << i.code << " at " << i.path;
  EXPECT_TRUE(r.pass());
}

TEST(ValidateStructure, CatalogEntriesReportExpectedCodeAndPath) {
  const json catalog = json::parse(read_text(source_path("tests/data/validation_catalog.json")));
  ASSERT_GE(catalog.size(), 10u);
  for (const auto& entry : catalog) {
    const std::string file = entry["fixture"];
    const ValidationReport r = check_document(read_text(source_path(file)));
    ASSERT_FALSE(r.pass()) << file;
    bool found = false;
    for (const Issue& i : r.issues) found |= i.code == entry["code"] && i.path == entry["path"];
    EXPECT_TRUE(found) << file << ": first issue " << r.issues[0].code << " at " << r.issues[0].path;
  }
}

TEST(ValidateStructure, RandomModelsPass) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    testing::RandomModelOptions o;
    o.shared = i % 3 == 0;
    const std::string doc = random_model(rng, o).dump();
    const ValidationReport r = check_document(doc);
    ASSERT_TRUE(r.pass()) << r.issues[0].code << " at " << r.issues[0].path << "\n" << doc;
  }
}

TEST(ValidateStructure, PriorSumMessageNamesTheComponent) {
  json c = leaf_component("C");
  c["states"] = {{"op", 0.6}, {"failed", 0.3}};
  const ValidationReport r = check_document(one_chain(json::array({c})).dump());
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].code, "PRIOR_SUM");
  EXPECT_EQ(r.issues[0].path, "goal.achieved_by.functions[0].depends_on.subfunctions[0].requires.components[0].states");
}

TEST(ValidateStructure, PriorSumToleranceIsOneInAMillion) {
  json c = leaf_component("C");
  c["states"] = {{"op", 0.6}, {"failed", 0.4 + 5e-7}};
  EXPECT_TRUE(check_document(one_chain(json::array({c})).dump()).pass());
  c["states"] = {{"op", 0.6}, {"failed", 0.4 + 5e-6}};
  EXPECT_FALSE(check_document(one_chain(json::array({c})).dump()).pass());
}

TEST(ToGraph, MinimalChainHasFourNodesAndThreeGates) {
  const ModelGraph g = load_model(one_chain(json::array({leaf_component("C")})).dump());
  const ElementCounts c = count_elements(g);
  EXPECT_EQ(c.total() - c.gates, 4u);
  EXPECT_EQ(c.gates, 3u);
  EXPECT_TRUE(check_invariants(g).empty());
}

TEST(ToGraph, RepeatedComponentIsOneNodeWithTwoParents) {
  json doc = one_chain(json::array({leaf_component("Shared")}));
  auto& subs = doc["Goal"]["achieved_by"]["functions"][0]["depends_on"]["subfunctions"];
  subs.push_back(second_subfunction_ref("Shared"));
  const ModelGraph g = load_model(doc.dump());
  const NodeId shared = *g.find(NodeKind::Component, "Shared");
  EXPECT_EQ(g.predecessors(shared).size(), 2u);
  EXPECT_EQ(count_elements(g).components, 1u);
  EXPECT_TRUE(check_invariants(g).empty());
}

TEST(ToGraph, RefusesInvalidModels) {
  try {
    to_graph(parse_model(read_text(source_path("fixtures/invalid/missing_gate.json"))));
    FAIL();
  } catch (const InvalidModelError& e) {
    EXPECT_EQ(e.code(), "INVALID_MODEL");
    EXPECT_FALSE(e.report().pass());
  }
}

TEST(Serialize, FixtureRoundTrips) {
  const ModelGraph g = load_model(fixture_text());
  const std::string once = serialize_graph(g);
  const ModelGraph back = load_model(once);
  EXPECT_EQ(g, back);
  EXPECT_EQ(once, serialize_graph(back));
}

TEST(Serialize, SharedComponentIsEmittedOnceThenByRef) {
  json doc = one_chain(json::array({leaf_component("Shared")}));
  auto& subs = doc["Goal"]["achieved_by"]["functions"][0]["depends_on"]["subfunctions"];
  subs.push_back(second_subfunction_ref("Shared"));
  const ModelGraph g = load_model(doc.dump());
  const std::string text = serialize_graph(g);
  EXPECT_NE(text.find("\"ref\": \"Shared\""), std::string::npos);
  EXPECT_EQ(load_model(text), g);
}

TEST(Serialize, RandomModelsRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    testing::RandomModelOptions o;
    o.shared = i % 2 == 0;
    const ModelGraph g = load_model(random_model(rng, o).dump());
    ASSERT_EQ(load_model(serialize_graph(g)), g) << serialize_graph(g);
  }
}

TEST(Serialize, ProbabilitiesSurviveExactly) {
  json c = leaf_component("C");
  c["states"] = {{"op", 0.1 + 0.2}, {"failed", 1.0 - (0.1 + 0.2)}};
  c["direct_p_success"] = 1.0 / 3.0;
  const ModelGraph g = load_model(one_chain(json::array({c})).dump());
  const ModelGraph back = load_model(serialize_graph(g));
  const auto& data = *back.node(*back.find(NodeKind::Component, "C")).data;
  EXPECT_EQ(data.states[0].prior, 0.1 + 0.2);
  EXPECT_EQ(*data.direct_p_success, 1.0 / 3.0);
}

TEST(Serialize, GoalOnlyGraphFailsRevalidation) {
  GraphBuilder b;
  b.add_node(NodeKind::Goal, "G");
  const ValidationReport r = check_document(serialize_graph(b.build()));
  EXPECT_FALSE(r.pass());
}

TEST(Cypher, SingleGoal) {
  GraphBuilder b;
  b.add_node(NodeKind::Goal, "G");
  EXPECT_NE(export_cypher(b.build()).find("CREATE (:Goal {name: \"G\"})"), std::string::npos);
}

TEST(Cypher, GoalGateFunctionEdges) {
  GraphBuilder b;
  b.add_child(b.add_node(NodeKind::Goal, "G"), GateType::And, b.add_node(NodeKind::Function, "F"));
  const std::string text = export_cypher(b.build());
  auto count = [&](std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("[:ACHIEVED_BY]"), 1u);
  EXPECT_EQ(count("[:DEPENDS_ON]"), 1u);
  EXPECT_EQ(count(":AND_gate {name: \"G_AND\"}"), 3u);  // CREATE plus both MATCH lines
}

TEST(Cypher, FixtureExportIsLintCleanAndSized) {
  const ModelGraph g = load_model(fixture_text());
  const std::string text = export_cypher(g);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(g.size() + g.edges().size()));
  for (const CypherLintIssue& i : lint_cypher(text)) ADD_FAILURE() << "line " << i.line << ": " << i.message;
  EXPECT_EQ(text, export_cypher(load_model(fixture_text())));
}

TEST(Cypher, NamesAreEscaped) {
  GraphBuilder b;
  b.add_node(NodeKind::Goal, "Say \"hi\" \\ now");
  const std::string text = export_cypher(b.build());
  EXPECT_TRUE(lint_cypher(text).empty()) << text;
}

TEST(CypherLint, FlagsBrokenStatements) {
  EXPECT_FALSE(lint_cypher("CREATE (:Goal {name: \"G\"}\n").empty());
  EXPECT_FALSE(lint_cypher("CREATE (:Widget {name: \"G\"});\n").empty());
  EXPECT_FALSE(lint_cypher("CREATE (:Goal {name: G});\n").empty());
  EXPECT_FALSE(lint_cypher("CREATE (:Goal {name: \"G});\n").empty());
  EXPECT_FALSE(lint_cypher("CREATE (:Goal {name: \"G\"})\n").empty());
  EXPECT_FALSE(lint_cypher("MATCH (a:Goal {name: \"G\"}), (b:AND_gate {name: \"G_AND\"}) CREATE (a)-[:LINKS]->(b);\n")
                   .empty());
  EXPECT_TRUE(lint_cypher("MATCH (a:Goal {name: \"G\"}), (b:AND_gate {name: \"G_AND\"}) CREATE (a)-[:ACHIEVED_BY]->(b);\n")
                  .empty());
}

}  // namespace
}  // namespace dml
