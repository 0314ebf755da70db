#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <thread>

#include "dml/error.hpp"
#include "dml/model_io.hpp"
#include "dml/query.hpp"
#include "dml/wire.hpp"
#include "random_models.hpp"

namespace dml {
namespace {

using testing::read_text;
using testing::source_path;

ModelGraph fixture() { return load_model(read_text(source_path("fixtures/aux_feedwater.json"))); }

std::string error_code(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

DiagnosticRequest upward() { return DiagnosticRequest{Task::UpwardReasoning}; }

DiagnosticRequest downward(std::string target) {
  DiagnosticRequest r;
  r.task = Task::DownwardReasoning;
  r.target = std::move(target);
  return r;
}

TEST(Session, NoModelIsReported) {
  Session s;
  EXPECT_FALSE(s.has_model());
  EXPECT_EQ(error_code([&] { s.run_upward(upward()); }), "NO_MODEL");
  EXPECT_EQ(error_code([&] { s.set_evidence(NamedEvidence{}); }), "NO_MODEL");
  EXPECT_EQ(error_code([&] { s.retrieve_subgraph("x", 1); }), "NO_MODEL");
}

TEST(Session, MutationsBumpRevisionAndReadsDoNot) {
  Session s;
  const auto r0 = s.revision();
  const auto r1 = s.load_model(fixture());
  EXPECT_GT(r1, r0);
  s.run_upward(upward());
  s.run_downward(downward("Supply Feedwater"));
  s.retrieve_subgraph("Supply Feedwater", 2);
  EXPECT_EQ(s.revision(), r1);
  const auto r2 = s.set_evidence(NamedEvidence{{"CST-2", {{"failed", 1.0}}}});
  EXPECT_EQ(r2, r1 + 1);
  EXPECT_EQ(s.reset_evidence(), r2 + 1);
  EXPECT_EQ(s.set_config({0.5}), r2 + 2);
}

TEST(Session, RejectedEvidenceLeavesStateUntouched) {
  Session s;
  s.load_model(fixture());
  const auto before = s.revision();
  EXPECT_EQ(error_code([&] { s.set_evidence(NamedEvidence{{"CST-2", {{"failed", 0.5}}}}); }), "PRIOR_SUM");
  EXPECT_EQ(s.revision(), before);
  EXPECT_TRUE(s.snapshot().evidence.empty());
}

TEST(Session, EvidenceMergesAndResets) {
  Session s;
  s.load_model(fixture());
  s.set_evidence(NamedEvidence{{"CST-2", {{"failed", 1.0}}}});
  s.set_evidence(NamedEvidence{{"CST-1", {{"operational", 1.0}}}});
  EXPECT_EQ(s.snapshot().evidence.size(), 2u);
  EXPECT_TRUE(s.run_upward(upward()).at(*s.snapshot().model->goal()).impacted);
  s.reset_evidence();
  EXPECT_FALSE(s.run_upward(upward()).at(*s.snapshot().model->goal()).impacted);
}

TEST(Session, LoadingAModelClearsEvidence) {
  Session s;
  s.load_model(fixture());
  s.set_evidence(NamedEvidence{{"CST-2", {{"failed", 1.0}}}});
  s.load_model(fixture());
  EXPECT_TRUE(s.snapshot().evidence.empty());
}

TEST(Session, RequestThresholdOverridesConfig) {
  Session s;
  s.load_model(fixture());
  DiagnosticRequest r = upward();
  r.threshold = 0.999;
  EXPECT_TRUE(s.run_upward(r).at(*s.snapshot().model->goal()).impacted);
  EXPECT_FALSE(s.run_upward(upward()).at(*s.snapshot().model->goal()).impacted);
}

TEST(Session, WrongTaskIsRejected) {
  Session s;
  s.load_model(fixture());
  EXPECT_EQ(error_code([&] { s.run_upward(downward("Supply Feedwater")); }), "WRONG_TASK");
  EXPECT_EQ(error_code([&] { s.run_downward(upward()); }), "WRONG_TASK");
}

TEST(Session, DownwardTargets) {
  Session s;
  s.load_model(fixture());
  EXPECT_EQ(s.run_downward(downward("Manage Condensation Tanks")).sets.size(), 1u);
  EXPECT_EQ(error_code([&] { s.run_downward(downward("CST-2/Absence of excessive sediment")); }), "LEAF_TARGET");
  EXPECT_EQ(error_code([&] { s.run_downward(downward("No Such Node")); }), "NOT_FOUND");
  DiagnosticRequest raw = downward("Ensure safe and effective operation of the system");
  raw.raw = true;
  EXPECT_FALSE(s.run_downward(raw).minimized);
}

TEST(Session, AmbiguousNamesNeedAKind) {
  GraphBuilder b;
  const NodeId g = b.add_node(NodeKind::Goal, "G");
  const NodeId f = b.add_node(NodeKind::Function, "Power");
  const NodeId sf = b.add_node(NodeKind::Subfunction, "Power");
  const NodeId c = b.add_node(NodeKind::Component, "C");
  b.add_child(g, GateType::And, f);
  b.add_child(f, GateType::And, sf);
  b.add_child(sf, GateType::And, c);
  b.set_component_data(c, ComponentData{{{"operational", 1.0}}, {}, 1.0});
  Session s;
  s.load_model(b.build());
  EXPECT_EQ(error_code([&] { s.resolve("Power"); }), "AMBIGUOUS_NAME");
  EXPECT_EQ(s.resolve("Power", NodeKind::Subfunction), sf);
}

TEST(Subgraph, FragmentIsWellTyped) {
  Session s;
  s.load_model(fixture());
  for (std::size_t depth : {0u, 1u, 2u, 4u}) {
    const Subgraph sub = s.retrieve_subgraph("Supply Feedwater", depth);
    EXPECT_TRUE(check_edge_typing(sub.to_graph()).empty()) << depth;
    std::set<NodeId> ids;
    for (const SubgraphNode& n : sub.nodes) ids.insert(n.id);
    for (const Edge& e : sub.edges) {
      EXPECT_TRUE(ids.count(e.source) && ids.count(e.target));
    }
  }
}

TEST(Subgraph, DepthCountsTiersAndIncludesTheParent) {
  Session s;
  s.load_model(fixture());
  const Subgraph one = s.retrieve_subgraph("Supply Feedwater", 1);
  // goal + its gate, the function, its gate, three subfunctions
  EXPECT_EQ(one.nodes.size(), 7u);
  const Subgraph zero = s.retrieve_subgraph("Supply Feedwater", 0);
  EXPECT_EQ(zero.nodes.size(), 1u);
  const Subgraph all = s.retrieve_subgraph("Ensure safe and effective operation of the system", 4);
  EXPECT_EQ(all.nodes.size(), count_elements(*s.snapshot().model).total());
}

TEST(Subgraph, CarriesProbabilitiesFromTheCurrentRevisionOnly) {
  Session s;
  s.load_model(fixture());
  EXPECT_FALSE(s.retrieve_subgraph("CST-2", 1).nodes[0].p_success);
  s.run_upward(upward());
  EXPECT_TRUE(s.retrieve_subgraph("CST-2", 1).nodes[0].p_success);
  s.set_evidence(NamedEvidence{{"CST-2", {{"failed", 1.0}}}});
  EXPECT_FALSE(s.retrieve_subgraph("CST-2", 1).nodes[0].p_success);
}

TEST(Session, ConcurrentReadersSeeConsistentSnapshots) {
  Session s;
  s.load_model(fixture());
  std::atomic<bool> stop{false};
  std::thread writer([&] {
    for (int i = 0; i < 200; ++i) {
      s.set_evidence(NamedEvidence{{"CST-2", {{"failed", 1.0}}}});
      s.reset_evidence();
    }
    stop = true;
  });
  int reads = 0;
  while (!stop) {
    const PropagationResult r = s.run_upward(upward());
    const double p = r.at(*s.snapshot().model->goal()).p_success;
    EXPECT_TRUE(p == 0.0 || p > 0.9);
    ++reads;
  }
  writer.join();
  EXPECT_GT(reads, 0);
}

}  // namespace
}  // namespace dml
