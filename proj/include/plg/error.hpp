#pragma once

#include <stdexcept>
#include <string>

namespace plg {

enum class ErrorCode {
  invalid_parameter = 1,
  decomposition_failure,
  structure_error,
  degenerate_epsilon,
  io_error,
  parse_error,
  config_error,
  state_mismatch,
  quadrature_failure,
};

/// Base exception for every failure raised by the library. The code maps
/// one-to-one onto the C API status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::decomposition_failure: return "decomposition-failure";
    case ErrorCode::structure_error: return "structure-error";
    case ErrorCode::degenerate_epsilon: return "degenerate-epsilon";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::state_mismatch: return "state-mismatch";
    case ErrorCode::quadrature_failure: return "quadrature-failure";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace plg
