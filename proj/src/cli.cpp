#include "dml/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dml/error.hpp"
#include "dml/model_io.hpp"
#include "dml/query.hpp"
#include "dml/service.hpp"
#include "dml/wire.hpp"

namespace dml {

namespace {

// Failure tagged with the exit code it maps to.
struct Exit {
  int code;
  Error error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kExitIo, Error("IO_ERROR", "cannot read '" + path + "'", path)};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ModelGraph read_model(const std::string& path, std::ostream& err) {
  const std::string text = read_file(path);
  try {
    return load_model(text);
  } catch (const InvalidModelError& e) {
    err << wire::render_report(e.report());
    throw Exit{kExitInvalid, e};
  } catch (const Error& e) {
    throw Exit{kExitIo, e};
  }
}

std::optional<NodeKind> kind_from(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto kind = node_kind_from_string(text);
  if (!kind) throw Exit{kExitIo, Error("INVALID_REQUEST", "unknown node kind '" + text + "'", "kind")};
  return kind;
}

void print_warnings(const ModelGraph& graph, const std::vector<Warning>& warnings, std::ostream& err) {
  if (!warnings.empty()) err << "warning: " << wire::warnings_header(graph, warnings) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diagnostic engine over Dynamic Master Logic models", "dml-engine"};
  app.require_subcommand(1);

  std::string model_path;
  auto* validate = app.add_subcommand("validate", "Check a model document and print the validation report");
  validate->add_option("model", model_path, "Model document")->required();

  auto* counts = app.add_subcommand("counts", "Print element counts per tier");
  counts->add_option("model", model_path, "Model document")->required();

  std::string evidence_path;
  std::optional<double> threshold;
  auto* up = app.add_subcommand("up", "Propagate component evidence up to the goal");
  up->add_option("model", model_path, "Model document")->required();
  up->add_option("--evidence,-e", evidence_path, "Evidence document");
  up->add_option("--threshold,-t", threshold, "Impact threshold");

  std::string node;
  std::string kind;
  bool raw = false;
  std::size_t limit = kDefaultPathSetLimit;
  auto* down = app.add_subcommand("down", "List success path-sets below a node");
  down->add_option("model", model_path, "Model document")->required();
  down->add_option("--node,-n", node, "Target node name")->required();
  down->add_option("--kind,-k", kind, "Node kind, when the name is shared across tiers");
  down->add_flag("--raw", raw, "Skip minimization");
  down->add_option("--limit", limit, "Path-set explosion guard");

  auto* cypher = app.add_subcommand("cypher", "Print the model as Cypher statements");
  cypher->add_option("model", model_path, "Model document")->required();

  std::string config_path;
  std::optional<int> port;
  std::string serve_model;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config,-c", config_path, "Service config file (default: $DML_ENGINE_CONFIG)");
  serve_cmd->add_option("--port,-p", port, "Override the configured port");
  serve_cmd->add_option("--model,-m", serve_model, "Override the model to preload");

  std::vector<const char*> argv{"dml-engine"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << wire::render_error("USAGE", e.what());
    return kExitIo;
  }

  try {
    if (validate->parsed()) {
      const ValidationReport report = check_document(read_file(model_path));
      out << wire::render_report(report);
      return report.pass() ? kExitOk : kExitInvalid;
    }
    if (counts->parsed()) {
      out << wire::render_counts(count_elements(read_model(model_path, err)));
      return kExitOk;
    }
    if (cypher->parsed()) {
      out << export_cypher(read_model(model_path, err));
      return kExitOk;
    }
    if (up->parsed()) {
      Session session;
      session.load_model(read_model(model_path, err));
      if (!evidence_path.empty()) {
        NamedEvidence evidence;
        try {
          evidence = wire::parse_evidence(read_file(evidence_path));
        } catch (const Error& e) {
          throw Exit{kExitIo, e};
        }
        try {
          session.set_evidence(evidence);
        } catch (const Error& e) {
          throw Exit{kExitInvalid, e};
        }
      }
      DiagnosticRequest request;
      request.task = Task::UpwardReasoning;
      request.threshold = threshold;
      const auto graph = session.snapshot().model;
      try {
        const PropagationResult result = session.run_upward(request);
        print_warnings(*graph, result.warnings, err);
        out << wire::render_propagation(*graph, result);
      } catch (const Error& e) {
        throw Exit{kExitQuery, e};
      }
      return kExitOk;
    }
    if (down->parsed()) {
      Session session;
      session.load_model(read_model(model_path, err));
      DiagnosticRequest request;
      request.task = Task::DownwardReasoning;
      request.target = node;
      request.kind = kind_from(kind);
      request.raw = raw;
      request.limit = limit;
      const auto graph = session.snapshot().model;
      try {
        out << wire::render_pathsets(*graph, session.run_downward(request));
      } catch (const Error& e) {
        throw Exit{kExitQuery, e};
      }
      return kExitOk;
    }
    if (serve_cmd->parsed()) {
      if (config_path.empty()) {
        if (const char* env = std::getenv(kConfigEnvVar)) config_path = env;
      }
      ServiceConfig config;
      try {
        if (!config_path.empty()) config = ServiceConfig::from_file(config_path);
        if (port) config.port = *port;
        if (!serve_model.empty()) config.model_path = serve_model;
        config.validate();
      } catch (const Error& e) {
        throw Exit{kExitIo, e};
      }
      return serve(std::move(config));
    }
  } catch (const Exit& e) {
    err << wire::render_error(e.error);
    return e.code;
  } catch (const Error& e) {
    err << wire::render_error(e);
    return kExitIo;
  }
  return kExitIo;
}

}  // namespace dml
