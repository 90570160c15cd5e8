#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phdf {

enum class ErrorKind {
  invalid_argument,
  degenerate_distribution,
  degenerate_driving_sequence,
  insufficient_grid,
  invalid_spec,
  not_exactly_computable,
  insufficient_data,
  not_regenerative,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::degenerate_distribution: return "degenerate-distribution";
    case ErrorKind::degenerate_driving_sequence: return "degenerate-driving-sequence";
    case ErrorKind::insufficient_grid: return "insufficient-grid";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::not_exactly_computable: return "not-exactly-computable";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::not_regenerative: return "not-regenerative";
    case ErrorKind::io: return "io-error";
  }
  return "unknown";
}

// Every library failure is reported through this type; what() is prefixed
// with the kind tag so CLI messages carry it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace phdf
