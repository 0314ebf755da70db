#pragma once

#include <string>
#include <string_view>

#include "dml/error.hpp"
#include "dml/model_graph.hpp"
#include "dml/model_io.hpp"
#include "dml/pathsets.hpp"
#include "dml/propagation.hpp"
#include "dml/query.hpp"

// JSON payloads shared by the CLI and the HTTP service. Every render_*
// function returns compact JSON terminated by a newline, so both surfaces
// emit byte-identical bodies.
namespace dml::wire {

std::string render_counts(const ElementCounts& counts);
std::string render_report(const ValidationReport& report);
// Array of {name, kind, p_success, impacted}, ordered by tier then name.
std::string render_propagation(const ModelGraph& graph, const PropagationResult& result);
// {source, minimized, count, truncated, pathsets: [[qualified leaf names]]}
std::string render_pathsets(const ModelGraph& graph, const PathSetCollection& collection);
std::string render_subgraph(const Subgraph& subgraph);
std::string render_revision(std::uint64_t revision);
std::string render_error(const Error& error);
std::string render_error(std::string_view code, std::string_view message, std::string_view path = {});

// Evidence document: {"<component>": {"<state>": probability, ...}, ...}.
// Throws MALFORMED_JSON or WRONG_TYPE.
NamedEvidence parse_evidence(std::string_view text);

std::string warnings_header(const ModelGraph& graph, const std::vector<Warning>& warnings);

}  // namespace dml::wire
