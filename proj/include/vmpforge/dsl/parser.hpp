#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vmpforge/dsl/ast.hpp"
#include "vmpforge/error.hpp"

namespace vmpforge::dsl {

/// First grammar violation in a model source.
class ParseError : public Error {
 public:
  ParseError(SourceLocation loc, std::vector<std::string> expected, std::string found,
             const std::string& message);

  const SourceLocation& location() const noexcept { return loc_; }
  /// Token descriptions that would have been accepted at `location()`.
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  SourceLocation loc_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// Parses `model Name(p: Double, q: Long) { val ... }`. A leading
/// `@Model class` header is accepted in place of `model`. Throws ParseError.
ModelAst parse_model(std::string_view source);

}  // namespace vmpforge::dsl
