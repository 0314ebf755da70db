#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dml/error.hpp"
#include "dml/model_graph.hpp"

namespace dml {

struct NamedProbability {
  std::string name;
  double value = 0.0;
  friend bool operator==(const NamedProbability&, const NamedProbability&) = default;
};

// One entry of the hierarchical document at any tier. Which fields are legal
// depends on the tier; the parser keeps every schema key it recognises so that
// validate_structure can report misplaced ones with a path.
struct ModelEntry {
  std::optional<std::string> name;
  std::optional<std::string> ref;
  std::optional<std::vector<NamedProbability>> states;
  std::optional<std::vector<NamedProbability>> given_state;
  std::optional<double> direct_p_success;

  // Child block: {"gate": ..., "<list_key>": [...]} found under `branch_key`.
  std::optional<std::string> branch_key;
  std::optional<GateType> gate;
  std::optional<std::string> list_key;
  std::vector<ModelEntry> children;

  friend bool operator==(const ModelEntry&, const ModelEntry&) = default;
};

struct Issue {
  std::string code;
  std::string path;
  std::string message;
};

struct HierarchicalModel {
  ModelEntry goal;
  std::vector<Issue> warnings;  // NA_DROPPED
};

struct ValidationReport {
  std::vector<Issue> issues;
  std::vector<Issue> warnings;
  bool pass() const noexcept { return issues.empty(); }
};

// Thrown by parse_model; code is one of MALFORMED_JSON, UNKNOWN_KEY,
// WRONG_TYPE, INVALID_GATE, MISSING_FIELD, CONFLICTING_KEYS.
class ModelParseError : public Error {
 public:
  using Error::Error;
};

// Thrown by to_graph for documents that do not validate.
class InvalidModelError : public Error {
 public:
  explicit InvalidModelError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

HierarchicalModel parse_model(std::string_view text);
ValidationReport validate_structure(const HierarchicalModel& model);
// parse_model + validate_structure, folding parse errors into a failing report.
ValidationReport check_document(std::string_view text);

ModelGraph to_graph(const HierarchicalModel& model);
// parse_model + to_graph.
ModelGraph load_model(std::string_view text);

std::string serialize_graph(const ModelGraph& graph);

std::string export_cypher(const ModelGraph& graph);

struct CypherLintIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

// Lexical checks over exported Cypher: statement shape, balanced brackets,
// closed string literals, quoted property values, known labels and types.
std::vector<CypherLintIssue> lint_cypher(std::string_view text);

}  // namespace dml
