#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dml {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;          // unreadable file, malformed document, bad usage
inline constexpr int kExitInvalid = 2;     // model or evidence fails validation
inline constexpr int kExitQuery = 3;       // query could not be answered

// `args` excludes the program name. Payloads go to `out`, diagnostics and
// error envelopes to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dml
