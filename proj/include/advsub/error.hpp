#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advsub {

enum class ErrorKind {
  kInvalidInput,  // shapes, labels, out-of-range arguments
  kFormat,        // bad magic numbers or malformed file contents
  kLength,        // truncated or mis-sized files
  kConsistency,   // inputs that are individually valid but disagree
  kIo,
  kConfig,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kFormat: return "format_error";
    case ErrorKind::kLength: return "length_error";
    case ErrorKind::kConsistency: return "consistency_error";
    case ErrorKind::kIo: return "io_error";
    case ErrorKind::kConfig: return "config_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

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

}  // namespace advsub
