// SPDX-License-Identifier: MIT
//
// Error taxonomy shared by every infergap module.  Each failure carries a
// machine-readable kind so the CLI can map it to a distinct exit code and
// tests can assert on the precise failure class instead of message text.
#pragma once

#include <stdexcept>
#include <string>

namespace infergap {

enum class errc {
  parse,            // malformed scenario / weight / manifest input
  invalid_argument, // domain violation (empty vector, bad budget, ...)
  resource_limit,   // instance exceeds the configured size guards
  degenerate_input, // numerically meaningless input (all-zero kernel, ...)
  trace_invalid,    // reasoning trace violates its step-containment contract
  io,               // file system failure
  internal,         // broken internal invariant; always a bug
};

class error : public std::runtime_error {
public:
  error(errc kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  errc kind() const noexcept { return kind_; }

private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& message) {
  throw error(kind, message);
}

// Distinct process exit codes for the CLI.  0 = success and 1 = self-test
// mismatch are reserved by the driver.
inline int exit_code_for(errc kind) noexcept {
  switch (kind) {
    case errc::parse: return 2;
    case errc::io: return 2;
    case errc::invalid_argument: return 3;
    case errc::resource_limit: return 4;
    case errc::degenerate_input: return 5;
    case errc::trace_invalid: return 6;
    case errc::internal: return 7;
  }
  return 7;
}

}  // namespace infergap
