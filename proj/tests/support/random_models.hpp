#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "dml/model_graph.hpp"
#include "dml/propagation.hpp"

namespace dml::testing {

struct RandomModelOptions {
  std::size_t max_components = 10;
  std::size_t max_states = 3;
  std::size_t max_conditions = 2;
  // Re-reference an earlier component from a second subfunction.
  bool shared = false;
  // Some components carry direct_p_success instead of conditions.
  bool allow_direct = true;
};

// Valid hierarchical document with random gates, priors and condition rows.
nlohmann::ordered_json random_model(std::mt19937_64& rng, const RandomModelOptions& options = {});

// Posteriors for a random subset of the graph's components.
EvidenceSet random_evidence(std::mt19937_64& rng, const ModelGraph& graph);

std::string read_text(const std::string& path);
// Absolute path of a file under the source tree.
std::string source_path(const std::string& relative);

}  // namespace dml::testing
