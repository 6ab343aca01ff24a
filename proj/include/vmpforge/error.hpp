#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vmpforge {

/// Position inside model source text. Lines and columns are 1-based.
struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

std::string to_string(const SourceLocation& loc);

enum class ErrorCode {
  // model front end
  ParseError,
  TypeError,
  // binder
  MissingParam,
  UnresolvedPlate,
  ShapeMismatch,
  DomainError,
  // numerical kernel
  DimensionMismatch,
  DegenerateDistribution,
  // engine
  NonFiniteMessage,
  CyclicModel,
  UnknownVariable,
  ObservedVariable,
  // oracle
  TooLarge,
  // everything else: bad arguments, malformed files
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception of the library. Every thrown error carries a stable code
/// so front ends can map it to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vmpforge
