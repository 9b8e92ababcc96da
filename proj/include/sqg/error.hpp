#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqg {

enum class ErrorKind {
  config,        // invalid parameters or configuration file
  domain,        // point outside the closure of the domain
  binding,       // field bound to a different basis, or dimension mismatch
  alignment,     // trajectories on different time grids
  numeric,       // root-finder failure, blow-up, instability
  cache_invalid, // cache header does not match the requested basis
  corruption,    // truncated cache or checksum mismatch
  verification,  // an identity check exceeded its tolerance
  io,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for a failure of the given kind.
/// 2 config, 3 cache, 4 numeric, 5 verification; io maps to 2.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::domain: return "domain";
    case ErrorKind::binding: return "binding";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::cache_invalid: return "cache_invalid";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::verification: return "verification";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::io:
    case ErrorKind::binding:
    case ErrorKind::alignment:
    case ErrorKind::domain: return 2;
    case ErrorKind::cache_invalid:
    case ErrorKind::corruption: return 3;
    case ErrorKind::numeric: return 4;
    case ErrorKind::verification: return 5;
  }
  return 1;
}

}  // namespace sqg
