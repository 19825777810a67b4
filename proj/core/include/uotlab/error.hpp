#pragma once

#include <stdexcept>
#include <string>

namespace uotlab {

enum class ErrorKind {
  kInvalidInput,
  kDomainError,
  kDegenerateInstance,
  kIo,
  kInternal,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, what);
}

[[noreturn]] inline void throw_domain(const std::string& what) {
  throw Error(ErrorKind::kDomainError, what);
}

}  // namespace uotlab
