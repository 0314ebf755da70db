#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "dml/model_io.hpp"

namespace dml {

namespace {

constexpr std::string_view kLabels[] = {"Goal",           "Function", "Subfunction", "Component",
                                        "SuccessCondition", "AND_gate", "OR_gate"};
constexpr std::string_view kRelationships[] = {"ACHIEVED_BY", "DEPENDS_ON", "REQUIRES", "SUCCESS_THROUGH"};

std::string_view label_of(NodeKind kind) { return kLabels[static_cast<int>(kind)]; }

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

// Node patterns with unique display names. Gates are named after their
// parent; a numeric suffix separates the rare same-label collisions.
class NodeNames {
 public:
  explicit NodeNames(const ModelGraph& graph) : graph_(graph) {
    std::map<std::pair<NodeKind, std::string>, std::vector<NodeId>> by_name;
    for (const Node& n : graph.nodes()) {
      by_name[{n.kind, is_gate(n.kind) ? graph.qualified_name(n.id) : n.name}].push_back(n.id);
    }
    for (auto& [key, ids] : by_name) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const bool suffix = is_gate(key.first) && i > 0;
        names_[ids[i]] = suffix ? key.second + "_" + std::to_string(i + 1) : key.second;
      }
    }
  }

  const std::string& name(NodeId id) const { return names_.at(id); }

  std::string properties(NodeId id) const {
    const Node& n = graph_.node(id);
    std::string out = "{name: " + quote(name(id));
    if (n.kind == NodeKind::SuccessCondition && n.owner) out += ", component: " + quote(graph_.node(*n.owner).name);
    return out + "}";
  }

  std::string pattern(std::string_view var, NodeId id) const {
    return "(" + std::string(var) + ":" + std::string(label_of(graph_.node(id).kind)) + " " + properties(id) + ")";
  }

  // Sort key: kind, then display name (qualified for conditions).
  std::tuple<int, std::string, std::string> order(NodeId id) const {
    const Node& n = graph_.node(id);
    return {static_cast<int>(n.kind), name(id), graph_.qualified_name(id)};
  }

 private:
  const ModelGraph& graph_;
  std::map<NodeId, std::string> names_;
};

}  // namespace

std::string export_cypher(const ModelGraph& graph) {
  const NodeNames names(graph);

  std::vector<NodeId> nodes;
  for (const Node& n : graph.nodes()) nodes.push_back(n.id);
  std::sort(nodes.begin(), nodes.end(), [&](NodeId a, NodeId b) { return names.order(a) < names.order(b); });

  std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
  std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
    return std::tuple(a.kind, names.order(a.source), names.order(a.target)) <
           std::tuple(b.kind, names.order(b.source), names.order(b.target));
  });

  std::string out;
  for (NodeId id : nodes) out += "CREATE " + names.pattern("", id) + ";\n";
  for (const Edge& e : edges) {
    out += "MATCH " + names.pattern("a", e.source) + ", " + names.pattern("b", e.target) + " CREATE (a)-[:" +
           std::string(to_string(e.kind)) + "]->(b);\n";
  }
  return out;
}

namespace {

enum class TokenKind { Ident, String, Punct };

struct Token {
  TokenKind kind;
  std::string text;
};

// Splits one statement into identifiers, string literals and punctuation.
// Returns an error message for unterminated strings or stray characters.
std::optional<std::string> tokenize(std::string_view line, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ') {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
      out.push_back({TokenKind::Ident, std::string(line.substr(i, j - i))});
      i = j;
    } else if (c == '"') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < line.size()) {
        if (line[j] == '\\') {
          if (j + 1 >= line.size()) break;
          text += line[j + 1];
          j += 2;
        } else if (line[j] == '"') {
          closed = true;
          ++j;
          break;
        } else {
          text += line[j++];
        }
      }
      if (!closed) return "unterminated string literal";
      out.push_back({TokenKind::String, std::move(text)});
      i = j;
    } else if (std::string_view("(){}[]:,;->").find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c)});
      ++i;
    } else {
      return std::string("unexpected character '") + c + "'";
    }
  }
  return std::nullopt;
}

class StatementChecker {
 public:
  explicit StatementChecker(const std::vector<Token>& tokens) : t_(tokens) {}

  std::optional<std::string> check() {
    if (t_.empty()) return "empty statement";
    if (t_.back().text != ";" || t_.back().kind != TokenKind::Punct) return "statement must end with ';'";
    if (auto err = balance()) return err;

    if (keyword("CREATE")) {
      if (auto err = node_pattern(false)) return err;
    } else if (keyword("MATCH")) {
      if (auto err = node_pattern(true)) return err;
      while (punct(",")) {
        if (auto err = node_pattern(true)) return err;
      }
      if (!keyword("CREATE")) return "MATCH must be followed by CREATE";
      if (auto err = relationship_pattern()) return err;
    } else {
      return "statement must start with CREATE or MATCH";
    }
    if (!punct(";") || pos_ != t_.size()) return "unexpected tokens before ';'";
    return std::nullopt;
  }

 private:
  std::optional<std::string> balance() const {
    std::string stack;
    for (const Token& tok : t_) {
      if (tok.kind != TokenKind::Punct) continue;
      const char c = tok.text[0];
      if (c == '(' || c == '{' || c == '[') {
        stack.push_back(c);
      } else if (c == ')' || c == '}' || c == ']') {
        const char open = c == ')' ? '(' : c == '}' ? '{' : '[';
        if (stack.empty() || stack.back() != open) return "unbalanced brackets";
        stack.pop_back();
      }
    }
    if (!stack.empty()) return "unbalanced brackets";
    return std::nullopt;
  }

  bool keyword(std::string_view word) {
    if (pos_ < t_.size() && t_[pos_].kind == TokenKind::Ident && t_[pos_].text == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool punct(std::string_view p) {
    if (pos_ < t_.size() && t_[pos_].kind == TokenKind::Punct && t_[pos_].text == p) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<std::string> ident() {
    if (pos_ < t_.size() && t_[pos_].kind == TokenKind::Ident) return t_[pos_++].text;
    return std::nullopt;
  }

  // (var? :Label {key: "value", ...})
  std::optional<std::string> node_pattern(bool needs_variable) {
    if (!punct("(")) return "expected '('";
    const auto var = ident();
    if (needs_variable && !var) return "MATCH pattern needs a variable";
    if (!punct(":")) return "node pattern needs a label";
    const auto label = ident();
    if (!label) return "missing label";
    if (std::find(std::begin(kLabels), std::end(kLabels), *label) == std::end(kLabels)) {
      return "unknown label '" + *label + "'";
    }
    if (auto err = properties()) return err;
    if (!punct(")")) return "expected ')'";
    return std::nullopt;
  }

  std::optional<std::string> properties() {
    if (!punct("{")) return "node pattern needs a property map";
    bool has_name = false;
    do {
      const auto key = ident();
      if (!key) return "expected property key";
      if (!punct(":")) return "expected ':' after property key";
      if (pos_ >= t_.size() || t_[pos_].kind != TokenKind::String) return "property '" + *key + "' must be quoted";
      if (*key == "name") has_name = !t_[pos_].text.empty();
      ++pos_;
    } while (punct(","));
    if (!punct("}")) return "expected '}'";
    if (!has_name) return "node pattern needs a non-empty name";
    return std::nullopt;
  }

  // (a)-[:TYPE]->(b)
  std::optional<std::string> relationship_pattern() {
    if (!punct("(") || !ident() || !punct(")")) return "expected '(var)'";
    if (!punct("-") || !punct("[") || !punct(":")) return "expected '-[:'";
    const auto type = ident();
    if (!type || std::find(std::begin(kRelationships), std::end(kRelationships), *type) == std::end(kRelationships)) {
      return "unknown relationship type";
    }
    if (!punct("]") || !punct("-") || !punct(">")) return "expected ']->'";
    if (!punct("(") || !ident() || !punct(")")) return "expected '(var)'";
    return std::nullopt;
  }

  const std::vector<Token>& t_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<CypherLintIssue> lint_cypher(std::string_view text) {
  std::vector<CypherLintIssue> issues;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    std::vector<Token> tokens;
    if (auto err = tokenize(line, tokens)) {
      issues.push_back({line_no, *err});
      continue;
    }
    if (auto err = StatementChecker(tokens).check()) issues.push_back({line_no, *err});
  }
  return issues;
}

}  // namespace dml
