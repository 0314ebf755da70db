#include "random_models.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dml::testing {

namespace {

using json = nlohmann::ordered_json;

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::vector<double> distribution(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& x : w) sum += (x = unit(rng) + 1e-3);
  for (double& x : w) x /= sum;
  return w;
}

const char* gate(std::mt19937_64& rng) { return pick(rng, 0, 1) ? "AND_gate" : "OR_gate"; }

json component(std::mt19937_64& rng, const RandomModelOptions& o, std::size_t index) {
  static const char* kStateNames[] = {"operational", "degraded", "failed"};
  json c{{"name", "C" + std::to_string(index)}};
  const std::size_t n_states = pick(rng, 1, std::min<std::size_t>(o.max_states, 3));
  const std::vector<double> priors = distribution(rng, n_states);
  json states = json::object();
  for (std::size_t i = 0; i < n_states; ++i) states[kStateNames[i]] = priors[i];
  c["states"] = std::move(states);

  const std::size_t n_conditions = pick(rng, o.allow_direct ? 0 : 1, o.max_conditions);
  if (n_conditions == 0) {
    c["direct_p_success"] = unit(rng);
    return c;
  }
  json conditions = json::array();
  for (std::size_t j = 0; j < n_conditions; ++j) {
    json given = json::object();
    for (std::size_t i = 0; i < n_states; ++i) given[kStateNames[i]] = unit(rng);
    // Condition names repeat across components on purpose.
    conditions.push_back(json{{"name", "k" + std::to_string(j + 1)}, {"given_state", std::move(given)}});
  }
  c["success_through"] = json{{"gate", gate(rng)}, {"success_conditions", std::move(conditions)}};
  return c;
}

}  // namespace

json random_model(std::mt19937_64& rng, const RandomModelOptions& o) {
  const std::size_t budget = pick(rng, 1, std::max<std::size_t>(o.max_components, 1));
  const std::size_t n_functions = pick(rng, 1, std::min<std::size_t>(3, budget));

  // Spread the component budget over functions, then subfunctions.
  std::vector<std::vector<std::size_t>> layout(n_functions);
  std::size_t remaining = budget;
  for (std::size_t f = 0; f < n_functions; ++f) {
    const std::size_t left_functions = n_functions - f - 1;
    const std::size_t here = f + 1 == n_functions ? remaining : pick(rng, 1, remaining - left_functions);
    remaining -= here;
    const std::size_t n_sub = pick(rng, 1, std::min<std::size_t>(2, here));
    std::size_t sub_left = here;
    for (std::size_t s = 0; s < n_sub; ++s) {
      const std::size_t take = s + 1 == n_sub ? sub_left : pick(rng, 1, sub_left - (n_sub - s - 1));
      layout[f].push_back(take);
      sub_left -= take;
    }
  }

  std::size_t next_component = 1;
  std::size_t next_sub = 1;
  std::vector<std::pair<std::size_t, std::string>> defined;  // (subfunction, component name)
  json functions = json::array();
  std::vector<json*> subfunction_lists;
  for (std::size_t f = 0; f < n_functions; ++f) {
    json subs = json::array();
    for (std::size_t count : layout[f]) {
      json comps = json::array();
      for (std::size_t k = 0; k < count; ++k) {
        json c = component(rng, o, next_component++);
        defined.emplace_back(next_sub, c["name"].get<std::string>());
        comps.push_back(std::move(c));
      }
      subs.push_back(json{{"name", "S" + std::to_string(next_sub++)},
                          {"requires", json{{"gate", gate(rng)}, {"components", std::move(comps)}}}});
    }
    functions.push_back(json{{"name", "F" + std::to_string(f + 1)},
                             {"depends_on", json{{"gate", gate(rng)}, {"subfunctions", std::move(subs)}}}});
  }

  if (o.shared && next_sub > 2) {
    // Reference a component defined in a different subfunction than the last.
    const std::size_t last_sub = next_sub - 1;
    std::vector<std::string> candidates;
    for (const auto& [sub, name] : defined) {
      if (sub != last_sub) candidates.push_back(name);
    }
    if (!candidates.empty()) {
      const std::string& name = candidates[pick(rng, 0, candidates.size() - 1)];
      json& last_function = functions.back();
      json& last = last_function["depends_on"]["subfunctions"].back();
      last["requires"]["components"].push_back(json{{"ref", name}});
    }
  }

  return json{{"Goal", json{{"name", "G"},
                            {"achieved_by", json{{"gate", gate(rng)}, {"functions", std::move(functions)}}}}}};
}

EvidenceSet random_evidence(std::mt19937_64& rng, const ModelGraph& graph) {
  EvidenceSet evidence;
  for (const Node& n : graph.nodes()) {
    if (n.kind != NodeKind::Component || pick(rng, 0, 1) == 0) continue;
    evidence[n.id] = distribution(rng, n.data->states.size());
  }
  return evidence;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string source_path(const std::string& relative) { return std::string(DML_SOURCE_DIR) + "/" + relative; }

}  // namespace dml::testing
