#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dml/pathsets.hpp"
#include "dml/propagation.hpp"
#include "dml/query.hpp"

namespace dml {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  PropagationConfig propagation;
  std::optional<std::string> model_path;
  std::size_t pathset_limit = kDefaultPathSetLimit;
  std::optional<std::string> static_dir;

  // Throws CONFIG_INVALID (with the offending key as path) or MALFORMED_JSON.
  static ServiceConfig from_json(std::string_view text);
  // Reads a JSON file; IO_ERROR if unreadable.
  static ServiceConfig from_file(const std::string& path);
  void validate() const;
};

// Name of the environment variable that points at a config file.
inline constexpr const char* kConfigEnvVar = "DML_ENGINE_CONFIG";

// HTTP front end over a single Session.
class HttpService {
 public:
  // Preloads config.model_path if set; throws InvalidModelError when it does
  // not validate, so a bad model refuses to start.
  explicit HttpService(ServiceConfig config);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  Session& session();
  const ServiceConfig& config() const;

  // Binds the configured port (BIND_FAILED on error).
  void bind();
  // Binds a free port on the configured host and returns it.
  int bind_ephemeral();
  // Serves until stop(); in-flight requests complete before it returns.
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs a service until SIGINT or SIGTERM. Returns a process exit code.
int serve(ServiceConfig config);

}  // namespace dml
