#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qosmc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourcePosition {
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, SourcePosition pos)
      : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) +
              ": " + message),
        position_(pos),
        message_(message) {}

  const SourcePosition& position() const { return position_; }
  const std::string& bare_message() const { return message_; }

 private:
  SourcePosition position_;
  std::string message_;
};

// Well-formed input that violates a model invariant (locality, unknown
// attribute, duplicate state, replaying a run that the system cannot produce).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  enum class Kind { launch, timeout, unknown, protocol };

  SolverError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace qosmc
