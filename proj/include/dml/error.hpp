#pragma once

#include <stdexcept>
#include <string>

namespace dml {

// Uniform error carrying a machine-readable code ("NOT_FOUND", "PRIOR_SUM", ...)
// and, where it applies, a path into the offending document.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(std::move(code)), path_(std::move(path)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string code_;
  std::string path_;
};

}  // namespace dml
