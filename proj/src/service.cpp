#include "dml/service.hpp"

#include <pthread.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dml/error.hpp"
#include "dml/model_io.hpp"
#include "dml/wire.hpp"

namespace dml {

namespace {

using json = nlohmann::json;

constexpr const char* kJson = "application/json";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot read '" + path + "'", path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_object(std::string_view text, bool allow_empty) {
  if (allow_empty && text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error("MALFORMED_JSON", e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw Error("WRONG_TYPE", "request body must be a JSON object");
  return doc;
}

void reject_unknown(const json& doc, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error("UNKNOWN_KEY", "unexpected key '" + key + "'", key);
    }
  }
}

template <typename T>
std::optional<T> field(const json& doc, const std::string& key, json::value_t expected, const char* what) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  const bool ok = expected == json::value_t::number_float ? it->is_number()
                  : expected == json::value_t::number_unsigned
                      ? it->is_number_unsigned() || (it->is_number_integer() && it->get<long long>() >= 0)
                      : it->type() == expected;
  if (!ok) throw Error("WRONG_TYPE", "'" + key + "' must be " + what, key);
  return it->get<T>();
}

int status_for(const std::string& code) {
  if (code == "NO_MODEL") return 409;
  if (code == "NOT_FOUND") return 404;
  if (code == "MALFORMED_JSON" || code == "WRONG_TYPE" || code == "UNKNOWN_KEY" || code == "MISSING_FIELD" ||
      code == "AMBIGUOUS_NAME" || code == "INVALID_REQUEST") {
    return 400;
  }
  return 422;
}

std::optional<NodeKind> parse_kind(const std::optional<std::string>& text) {
  if (!text) return std::nullopt;
  auto kind = node_kind_from_string(*text);
  if (!kind) throw Error("INVALID_REQUEST", "unknown node kind '" + *text + "'", "kind");
  return kind;
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 1 || port > 65535) throw Error("CONFIG_INVALID", "port must lie in [1, 65535]", "port");
  if (pathset_limit == 0) throw Error("CONFIG_INVALID", "pathset_limit must be positive", "pathset_limit");
  if (!(propagation.threshold >= 0.0 && propagation.threshold <= 1.0)) {
    throw Error("CONFIG_INVALID", "threshold must lie in [0, 1]", "threshold");
  }
  if (host.empty()) throw Error("CONFIG_INVALID", "host must not be empty", "host");
}

ServiceConfig ServiceConfig::from_json(std::string_view text) {
  const json doc = parse_object(text, false);
  ServiceConfig config;
  try {
    reject_unknown(doc, {"host", "port", "threshold", "model_path", "pathset_limit", "static_dir"});
    if (auto v = field<std::string>(doc, "host", json::value_t::string, "a string")) config.host = *v;
    if (doc.contains("port")) {
      if (!doc["port"].is_number_integer()) throw Error("WRONG_TYPE", "'port' must be an integer", "port");
      const long long port = doc["port"].get<long long>();
      config.port = port < 0 || port > 65535 ? -1 : static_cast<int>(port);
    }
    if (auto v = field<double>(doc, "threshold", json::value_t::number_float, "a number")) {
      config.propagation.threshold = *v;
    }
    config.model_path = field<std::string>(doc, "model_path", json::value_t::string, "a string");
    if (doc.contains("pathset_limit")) {
      if (!doc["pathset_limit"].is_number_integer() || doc["pathset_limit"].get<long long>() < 1) {
        throw Error("CONFIG_INVALID", "pathset_limit must be a positive integer", "pathset_limit");
      }
      config.pathset_limit = doc["pathset_limit"].get<std::size_t>();
    }
    config.static_dir = field<std::string>(doc, "static_dir", json::value_t::string, "a string");
  } catch (const Error& e) {
    throw Error("CONFIG_INVALID", e.what(), e.path());
  }
  config.validate();
  return config;
}

ServiceConfig ServiceConfig::from_file(const std::string& path) { return from_json(read_file(path)); }

struct HttpService::Impl {
  explicit Impl(ServiceConfig c) : config(std::move(c)), session(config.propagation) {}

  ServiceConfig config;
  Session session;
  httplib::Server server;
  std::atomic<bool> bound{false};

  void reply(httplib::Response& res, int status, const std::string& body, const char* type = kJson) {
    res.status = status;
    res.set_header("X-Dml-Revision", std::to_string(session.revision()));
    res.set_content(body, type);
  }

  void fail(httplib::Response& res, const Error& e) { reply(res, status_for(e.code()), wire::render_error(e)); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  httplib::Server::Handler guard(Handler handler) {
    return [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        fail(res, e);
      } catch (const std::exception& e) {
        reply(res, 500, wire::render_error("INTERNAL", e.what()));
      }
    };
  }

  std::shared_ptr<const ModelGraph> model() const {
    auto snap = session.snapshot();
    if (!snap.model) throw Error("NO_MODEL", "no model loaded");
    return snap.model;
  }

  void routes() {
    server.Get("/healthz", guard([this](const auto&, auto& res) { reply(res, 200, "{\"status\":\"ok\"}\n"); }));

    server.Post("/model", guard([this](const httplib::Request& req, httplib::Response& res) {
      const ValidationReport report = check_document(req.body);
      if (!report.pass()) return reply(res, 422, wire::render_report(report));
      ModelGraph graph = load_model(req.body);
      const ElementCounts counts = count_elements(graph);
      session.load_model(std::move(graph));
      reply(res, 201, wire::render_counts(counts));
    }));

    server.Get("/model", guard([this](const auto&, auto& res) { reply(res, 200, serialize_graph(*model())); }));
    server.Get("/model/counts",
               guard([this](const auto&, auto& res) { reply(res, 200, wire::render_counts(count_elements(*model()))); }));
    server.Get("/model/cypher", guard([this](const auto&, auto& res) {
                 reply(res, 200, export_cypher(*model()), "text/plain; charset=utf-8");
               }));

    server.Get("/model/subgraph", guard([this](const httplib::Request& req, httplib::Response& res) {
                 if (!req.has_param("target")) throw Error("MISSING_FIELD", "query parameter 'target' is required", "target");
                 std::size_t depth = 1;
                 if (req.has_param("depth")) {
                   const std::string text = req.get_param_value("depth");
                   auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), depth);
                   if (ec != std::errc() || end != text.data() + text.size()) {
                     throw Error("INVALID_REQUEST", "depth must be a non-negative integer", "depth");
                   }
                 }
                 std::optional<std::string> kind;
                 if (req.has_param("kind")) kind = req.get_param_value("kind");
                 const Subgraph sub = session.retrieve_subgraph(req.get_param_value("target"), depth, parse_kind(kind));
                 reply(res, 200, wire::render_subgraph(sub));
               }));

    const auto put_evidence = guard([this](const httplib::Request& req, httplib::Response& res) {
      const NamedEvidence evidence = wire::parse_evidence(req.body);
      const std::uint64_t revision = session.set_evidence(evidence);
      reply(res, 200, wire::render_revision(revision));
    });
    server.Put("/evidence", put_evidence);
    server.Post("/evidence", put_evidence);
    server.Delete("/evidence", guard([this](const auto&, auto& res) {
                    reply(res, 200, wire::render_revision(session.reset_evidence()));
                  }));

    server.Post("/propagate", guard([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_object(req.body, true);
                  reject_unknown(body, {"threshold"});
                  DiagnosticRequest request;
                  request.task = Task::UpwardReasoning;
                  request.threshold = field<double>(body, "threshold", json::value_t::number_float, "a number");
                  auto graph = model();
                  const PropagationResult result = session.run_upward(request);
                  if (!result.warnings.empty()) res.set_header("X-Dml-Warnings", wire::warnings_header(*graph, result.warnings));
                  reply(res, 200, wire::render_propagation(*graph, result));
                }));

    server.Post("/pathsets", guard([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_object(req.body, false);
                  reject_unknown(body, {"target", "raw", "limit", "kind"});
                  DiagnosticRequest request;
                  request.task = Task::DownwardReasoning;
                  auto target = field<std::string>(body, "target", json::value_t::string, "a string");
                  if (!target) throw Error("MISSING_FIELD", "'target' is required", "target");
                  request.target = *target;
                  request.raw = field<bool>(body, "raw", json::value_t::boolean, "a boolean").value_or(false);
                  request.limit = field<std::size_t>(body, "limit", json::value_t::number_unsigned, "a non-negative integer")
                                      .value_or(config.pathset_limit);
                  request.kind = parse_kind(field<std::string>(body, "kind", json::value_t::string, "a string"));
                  auto graph = model();
                  reply(res, 200, wire::render_pathsets(*graph, session.run_downward(request)));
                }));

    if (config.static_dir && !server.set_mount_point("/", *config.static_dir)) {
      throw Error("CONFIG_INVALID", "static_dir '" + *config.static_dir + "' is not a directory", "static_dir");
    }
  }
};

HttpService::HttpService(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->config.validate();
  if (impl_->config.model_path) {
    const std::string text = read_file(*impl_->config.model_path);
    impl_->session.load_model(load_model(text));
  }
  impl_->routes();
}

HttpService::~HttpService() { stop(); }

Session& HttpService::session() { return impl_->session; }
const ServiceConfig& HttpService::config() const { return impl_->config; }

void HttpService::bind() {
  if (!impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) {
    throw Error("BIND_FAILED",
                "cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port), "port");
  }
  impl_->bound = true;
}

int HttpService::bind_ephemeral() {
  const int port = impl_->server.bind_to_any_port(impl_->config.host);
  if (port < 0) throw Error("BIND_FAILED", "cannot bind " + impl_->config.host, "host");
  impl_->config.port = port;
  impl_->bound = true;
  return port;
}

void HttpService::run() {
  if (!impl_->bound) bind();
  impl_->server.listen_after_bind();
}

void HttpService::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpService::running() const { return impl_->server.is_running(); }

int serve(ServiceConfig config) {
  // Block the shutdown signals before any worker thread exists, then field
  // them on a dedicated thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<HttpService> service;
  try {
    service = std::make_unique<HttpService>(std::move(config));
    service->bind();
  } catch (const InvalidModelError& e) {
    std::cerr << wire::render_report(e.report());
    return 2;
  } catch (const Error& e) {
    std::cerr << wire::render_error(e);
    return 1;
  }

  std::atomic<bool> done{false};
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (!done) service->stop();
  });

  std::cerr << "listening on http://" << service->config().host << ":" << service->config().port << "\n";
  service->run();
  done = true;
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  return 0;
}

}  // namespace dml
