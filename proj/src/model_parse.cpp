#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "dml/model_io.hpp"

namespace dml {

namespace {

using json = nlohmann::ordered_json;

constexpr double kSumTolerance = 1e-6;
constexpr std::string_view kNotAvailable = "N/A";

constexpr int kGoal = 0;
constexpr int kSuccessCondition = 4;

// Per-tier schema vocabulary, indexed by tier.
constexpr std::string_view kBranchKey[] = {"achieved_by", "depends_on", "requires", "success_through"};
constexpr std::string_view kListKey[] = {"", "functions", "subfunctions", "components", "success_conditions"};
constexpr std::string_view kTierName[] = {"goal", "function", "subfunction", "component", "success condition"};

std::optional<int> branch_tier(std::string_view key) {
  for (int t = 0; t < 4; ++t) {
    if (kBranchKey[t] == key) return t;
  }
  return std::nullopt;
}

std::optional<int> list_tier(std::string_view key) {
  for (int t = 1; t <= 4; ++t) {
    if (kListKey[t] == key) return t;
  }
  return std::nullopt;
}

bool is_na(const json& v) { return v.is_string() && v.get_ref<const std::string&>() == kNotAvailable; }

std::string type_name(const json& v) { return v.type_name(); }

[[noreturn]] void wrong_type(const std::string& path, std::string_view expected, const json& got) {
  throw ModelParseError("WRONG_TYPE", "expected " + std::string(expected) + ", got " + type_name(got), path);
}

class Parser {
 public:
  explicit Parser(std::vector<Issue>& warnings) : warnings_(warnings) {}

  void drop(const std::string& path) {
    warnings_.push_back(Issue{"NA_DROPPED", path, "N/A value dropped"});
  }

  std::optional<std::string> string_field(const json& v, const std::string& path) {
    if (is_na(v)) {
      drop(path);
      return std::nullopt;
    }
    if (!v.is_string()) wrong_type(path, "string", v);
    return v.get<std::string>();
  }

  std::optional<double> number_field(const json& v, const std::string& path) {
    if (is_na(v)) {
      drop(path);
      return std::nullopt;
    }
    if (!v.is_number()) wrong_type(path, "number", v);
    return v.get<double>();
  }

  std::optional<std::vector<NamedProbability>> distribution(const json& v, const std::string& path) {
    if (is_na(v)) {
      drop(path);
      return std::nullopt;
    }
    if (!v.is_object()) wrong_type(path, "object", v);
    std::vector<NamedProbability> out;
    for (const auto& [key, value] : v.items()) {
      if (auto p = number_field(value, path + "." + key)) out.push_back({key, *p});
    }
    return out;
  }

  // Returns nullopt when the entry is dropped as N/A.
  std::optional<ModelEntry> entry(const json& v, const std::string& path) {
    if (is_na(v)) {
      drop(path);
      return std::nullopt;
    }
    if (!v.is_object()) wrong_type(path, "object", v);
    if (v.contains("name") && is_na(v.at("name"))) {
      drop(path + ".name");
      return std::nullopt;
    }

    ModelEntry e;
    for (const auto& [key, value] : v.items()) {
      const std::string sub = path + "." + key;
      if (key == "name") {
        e.name = string_field(value, sub);
      } else if (key == "ref") {
        e.ref = string_field(value, sub);
      } else if (key == "states") {
        e.states = distribution(value, sub);
      } else if (key == "given_state") {
        e.given_state = distribution(value, sub);
      } else if (key == "direct_p_success") {
        e.direct_p_success = number_field(value, sub);
      } else if (branch_tier(key)) {
        if (e.branch_key) {
          throw ModelParseError("CONFLICTING_KEYS",
                                "both '" + *e.branch_key + "' and '" + key + "' present", sub);
        }
        if (is_na(value)) {
          drop(sub);
          continue;
        }
        e.branch_key = key;
        branch(value, sub, e);
      } else {
        throw ModelParseError("UNKNOWN_KEY", "unknown key '" + key + "'", sub);
      }
    }
    return e;
  }

  void branch(const json& v, const std::string& path, ModelEntry& e) {
    if (!v.is_object()) wrong_type(path, "object", v);
    for (const auto& [key, value] : v.items()) {
      const std::string sub = path + "." + key;
      if (key == "gate") {
        if (is_na(value)) {
          drop(sub);
          continue;
        }
        if (!value.is_string()) wrong_type(sub, "string", value);
        const auto& label = value.get_ref<const std::string&>();
        if (label == "AND_gate") {
          e.gate = GateType::And;
        } else if (label == "OR_gate") {
          e.gate = GateType::Or;
        } else {
          throw ModelParseError("INVALID_GATE", "gate must be \"AND_gate\" or \"OR_gate\", got \"" + label + "\"", sub);
        }
      } else if (list_tier(key)) {
        if (e.list_key) {
          throw ModelParseError("CONFLICTING_KEYS", "both '" + *e.list_key + "' and '" + key + "' present", sub);
        }
        if (is_na(value)) {
          drop(sub);
          continue;
        }
        if (!value.is_array()) wrong_type(sub, "array", value);
        e.list_key = key;
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (auto child = entry(value[i], sub + "[" + std::to_string(i) + "]")) {
            e.children.push_back(std::move(*child));
          }
        }
      } else {
        throw ModelParseError("UNKNOWN_KEY", "unknown key '" + key + "'", sub);
      }
    }
  }

 private:
  std::vector<Issue>& warnings_;
};

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

// Two-pass validator: the first pass indexes full definitions per tier so that
// refs may point forward; the second walks the tree and reports issues.
class Validator {
 public:
  explicit Validator(ValidationReport& report) : report_(report) {}

  void run(const ModelEntry& goal) {
    index(goal, kGoal);
    std::vector<std::pair<int, std::string>> ancestors;
    visit(goal, kGoal, "goal", ancestors);
  }

 private:
  void issue(std::string code, std::string path, std::string message) {
    report_.issues.push_back(Issue{std::move(code), std::move(path), std::move(message)});
  }

  void index(const ModelEntry& e, int tier) {
    if (e.ref || !e.name || tier == kSuccessCondition) return;
    auto& defs = definitions_[tier];
    if (auto it = defs.find(*e.name); it == defs.end()) {
      defs.emplace(*e.name, &e);
    } else if (!(*it->second == e)) {
      conflicts_.insert(&e);
    }
    if (tier < kSuccessCondition && e.list_key && list_tier(*e.list_key) == tier + 1) {
      for (const ModelEntry& child : e.children) index(child, tier + 1);
    }
  }

  void visit(const ModelEntry& e, int tier, const std::string& path,
             std::vector<std::pair<int, std::string>>& ancestors) {
    if (e.ref) {
      visit_ref(e, tier, path, ancestors);
      return;
    }
    if (!e.name) {
      issue("MISSING_FIELD", path + ".name", "missing \"name\"");
    } else if (std::all_of(e.name->begin(), e.name->end(), [](unsigned char c) { return std::isspace(c); })) {
      issue("EMPTY_NAME", path + ".name", "name is empty");
    }
    if (conflicts_.count(&e)) {
      issue("CONFLICTING_DEFINITION", path,
            std::string(kTierName[tier]) + " '" + e.name.value_or("") + "' is defined twice with different content");
    }

    check_fields(e, tier, path);
    if (tier == 3) check_component(e, path);

    if (tier == kSuccessCondition) return;

    const std::string expected_branch(kBranchKey[tier]);
    if (!e.branch_key) {
      if (tier != 3) issue("MISSING_FIELD", path + "." + expected_branch, "missing \"" + expected_branch + "\"");
      return;
    }
    if (*e.branch_key != expected_branch) return;  // reported by check_fields

    const std::string bpath = path + "." + expected_branch;
    if (!e.gate) issue("GATE_MISSING", bpath, "no \"gate\" at this branching point");

    const std::string expected_list(kListKey[tier + 1]);
    if (!e.list_key) {
      issue("MISSING_FIELD", bpath + "." + expected_list, "missing \"" + expected_list + "\"");
      return;
    }
    const std::string lpath = bpath + "." + *e.list_key;
    const int found = *list_tier(*e.list_key);
    if (found > tier + 1) {
      issue("LEVEL_SKIP", lpath,
            std::string(kTierName[found]) + " entries placed directly below a " + std::string(kTierName[tier]));
      return;
    }
    if (found < tier + 1) {
      issue("LEVEL_ORDER", lpath,
            std::string(kTierName[found]) + " entries placed below a " + std::string(kTierName[tier]));
      return;
    }
    if (e.children.empty()) {
      issue("EMPTY_BRANCH", lpath, "a " + std::string(kTierName[tier]) + " needs at least one " +
                                       std::string(kTierName[tier + 1]));
    }

    std::set<std::string> siblings;
    if (e.name) ancestors.emplace_back(tier, *e.name);
    for (std::size_t i = 0; i < e.children.size(); ++i) {
      const ModelEntry& child = e.children[i];
      const std::string cpath = lpath + "[" + std::to_string(i) + "]";
      const std::optional<std::string>& key = child.ref ? child.ref : child.name;
      if (key && !siblings.insert(*key).second) {
        issue("DUPLICATE_SIBLING", cpath, "'" + *key + "' appears twice in this list");
      }
      visit(child, tier + 1, cpath, ancestors);
    }
    if (e.name) ancestors.pop_back();
  }

  void visit_ref(const ModelEntry& e, int tier, const std::string& path,
                 const std::vector<std::pair<int, std::string>>& ancestors) {
    if (e.name || e.states || e.given_state || e.direct_p_success || e.branch_key) {
      issue("MISPLACED_FIELD", path, "a {\"ref\"} entry carries no other fields");
    }
    if (tier == kGoal || tier == kSuccessCondition) {
      issue("MISPLACED_FIELD", path + ".ref", std::string(kTierName[tier]) + " entries cannot be references");
      return;
    }
    if (e.ref->empty()) {
      issue("EMPTY_NAME", path + ".ref", "reference name is empty");
      return;
    }
    if (definitions_[tier].count(*e.ref)) return;
    const bool ancestor = std::any_of(ancestors.begin(), ancestors.end(),
                                      [&](const auto& a) { return a.second == *e.ref; });
    if (ancestor) {
      issue("REF_CYCLE", path + ".ref", "reference to ancestor '" + *e.ref + "' would create a cycle");
    } else {
      issue("UNRESOLVED_REF", path + ".ref",
            "no " + std::string(kTierName[tier]) + " named '" + *e.ref + "' is defined");
    }
  }

  void check_fields(const ModelEntry& e, int tier, const std::string& path) {
    const auto misplaced = [&](const std::string& key) {
      issue("MISPLACED_FIELD", path + "." + key,
            "\"" + key + "\" is not allowed on a " + std::string(kTierName[tier]));
    };
    if (tier != 3 && e.states) misplaced("states");
    if (tier != 3 && e.direct_p_success) misplaced("direct_p_success");
    if (tier != kSuccessCondition && e.given_state) misplaced("given_state");
    if (e.branch_key && (tier == kSuccessCondition || *e.branch_key != kBranchKey[tier])) misplaced(*e.branch_key);
  }

  void check_component(const ModelEntry& e, const std::string& path) {
    std::vector<NamedProbability> states{{"operational", 1.0}};
    if (e.states) {
      states = *e.states;
      if (states.empty()) {
        issue("STATES_EMPTY", path + ".states", "a component needs at least one state");
      }
      double sum = 0.0;
      for (const auto& s : states) {
        if (!probability(s.value)) issue("PROBABILITY_RANGE", path + ".states." + s.name, "prior outside [0,1]");
        sum += s.value;
      }
      if (!states.empty() && std::abs(sum - 1.0) > kSumTolerance) {
        issue("PRIOR_SUM", path + ".states", "state priors sum to " + json(sum).dump() + ", expected 1");
      }
    }

    const bool has_conditions = e.branch_key && *e.branch_key == kBranchKey[3];
    if (!has_conditions && !e.direct_p_success) {
      issue("MISSING_SUCCESS_LOGIC", path, "component has neither success_through nor direct_p_success");
    }
    if (has_conditions && e.direct_p_success) {
      issue("CONFLICTING_SUCCESS_LOGIC", path, "component has both success_through and direct_p_success");
    }
    if (e.direct_p_success && !probability(*e.direct_p_success)) {
      issue("PROBABILITY_RANGE", path + ".direct_p_success", "probability outside [0,1]");
    }
    if (!has_conditions || !e.list_key || *e.list_key != kListKey[kSuccessCondition]) return;

    const std::string lpath = path + ".success_through.success_conditions";
    for (std::size_t i = 0; i < e.children.size(); ++i) {
      const ModelEntry& c = e.children[i];
      const std::string gpath = lpath + "[" + std::to_string(i) + "].given_state";
      if (c.ref) continue;
      if (!c.given_state) {
        issue("MISSING_FIELD", gpath, "missing \"given_state\"");
        continue;
      }
      for (const auto& g : *c.given_state) {
        const bool declared = std::any_of(states.begin(), states.end(), [&](const auto& s) { return s.name == g.name; });
        if (!declared) issue("GIVEN_STATE_UNKNOWN", gpath + "." + g.name, "state '" + g.name + "' is not declared");
        if (!probability(g.value)) issue("PROBABILITY_RANGE", gpath + "." + g.name, "probability outside [0,1]");
      }
      for (const auto& s : states) {
        const auto& gs = *c.given_state;
        if (std::none_of(gs.begin(), gs.end(), [&](const auto& g) { return g.name == s.name; })) {
          issue("GIVEN_STATE_INCOMPLETE", gpath, "no likelihood given for state '" + s.name + "'");
        }
      }
    }
  }

  ValidationReport& report_;
  std::map<std::string, const ModelEntry*> definitions_[5];
  std::set<const ModelEntry*> conflicts_;
};

}  // namespace

HierarchicalModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ModelParseError("MALFORMED_JSON", e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) wrong_type("", "object", doc);
  for (const auto& [key, value] : doc.items()) {
    if (key != "Goal") throw ModelParseError("UNKNOWN_KEY", "unknown top-level key '" + key + "'", key);
  }
  if (!doc.contains("Goal")) throw ModelParseError("MISSING_FIELD", "missing \"Goal\"", "goal");

  HierarchicalModel model;
  Parser parser(model.warnings);
  auto goal = parser.entry(doc.at("Goal"), "goal");
  if (!goal) throw ModelParseError("MISSING_FIELD", "\"Goal\" is N/A", "goal");
  model.goal = std::move(*goal);
  return model;
}

ValidationReport validate_structure(const HierarchicalModel& model) {
  ValidationReport report;
  report.warnings = model.warnings;
  Validator(report).run(model.goal);
  return report;
}

ValidationReport check_document(std::string_view text) {
  try {
    return validate_structure(parse_model(text));
  } catch (const ModelParseError& e) {
    ValidationReport report;
    report.issues.push_back(Issue{e.code(), e.path(), e.what()});
    return report;
  }
}

InvalidModelError::InvalidModelError(ValidationReport report)
    : Error("INVALID_MODEL",
            report.issues.empty() ? "model failed validation"
                                  : report.issues.front().code + " at " + report.issues.front().path + ": " +
                                        report.issues.front().message,
            report.issues.empty() ? std::string{} : report.issues.front().path),
      report_(std::move(report)) {}

}  // namespace dml
