#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vmpforge/error.hpp"

namespace vmpforge::dsl {

enum class TokenKind {
  KwVal,
  KwModel,
  KwClass,
  KwUntil,
  KwTo,
  Identifier,
  Integer,
  Float,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Colon,
  Semicolon,
  Dot,
  Arrow,  // =>
  Equals,
  Question,
  Underscore,
  Plus,
  Minus,
  Star,
  Slash,
  At,
  Error,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier name, raw literal text, or error description
  std::int64_t integer = 0;
  double number = 0.0;  // value of Integer and Float tokens
  SourceLocation loc;
};

/// Short display name of a token kind, as used in expected-token sets.
std::string_view describe(TokenKind kind);

/// Compact rendering such as `kw:val`, `id:pi`, `int:0`, `float:0.005`.
std::string to_string(const Token& token);

/// Splits model source into tokens. Whitespace and `//` comments are
/// dropped. Characters outside the grammar become Error tokens carrying
/// their location; the sequence always ends with an End token.
std::vector<Token> tokenize(std::string_view source);

}  // namespace vmpforge::dsl
