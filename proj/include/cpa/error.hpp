#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cpa {

/// Base error type. Every failure carries a short machine-parsable code
/// (e.g. "dispersion-range", "invalid-argument") next to the human message;
/// the CLI prints `error: <code>: <message>` and exits nonzero.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// File access problems (missing file, unreadable path).
class IoError : public Error {
public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

/// Structural problems in an input document: unknown keys, wrong types,
/// missing required fields.
class SchemaError : public Error {
public:
  explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

/// Well-formed input whose values violate a domain invariant
/// (e.g. filling_factor outside (0,1]).
class InvariantError : public Error {
public:
  explicit InvariantError(const std::string& message) : Error("invariant", message) {}
};

[[noreturn]] inline void fail(const char* code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const char* code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace cpa
