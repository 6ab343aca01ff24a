#include "vmpforge/dsl/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace vmpforge::dsl {

std::string_view describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::KwVal: return "val";
    case TokenKind::KwModel: return "model";
    case TokenKind::KwClass: return "class";
    case TokenKind::KwUntil: return "until";
    case TokenKind::KwTo: return "to";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Integer: return "integer";
    case TokenKind::Float: return "float";
    case TokenKind::LParen: return "(";
    case TokenKind::RParen: return ")";
    case TokenKind::LBrace: return "{";
    case TokenKind::RBrace: return "}";
    case TokenKind::Comma: return ",";
    case TokenKind::Colon: return ":";
    case TokenKind::Semicolon: return ";";
    case TokenKind::Dot: return ".";
    case TokenKind::Arrow: return "=>";
    case TokenKind::Equals: return "=";
    case TokenKind::Question: return "?";
    case TokenKind::Underscore: return "_";
    case TokenKind::Plus: return "+";
    case TokenKind::Minus: return "-";
    case TokenKind::Star: return "*";
    case TokenKind::Slash: return "/";
    case TokenKind::At: return "@";
    case TokenKind::Error: return "error";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

std::string to_string(const Token& token) {
  switch (token.kind) {
    case TokenKind::KwVal:
    case TokenKind::KwModel:
    case TokenKind::KwClass:
    case TokenKind::KwUntil:
    case TokenKind::KwTo:
      return "kw:" + std::string(describe(token.kind));
    case TokenKind::Identifier: return "id:" + token.text;
    case TokenKind::Integer: return "int:" + std::to_string(token.integer);
    case TokenKind::Float: {
      std::ostringstream os;
      os << "float:" << token.number;
      return os.str();
    }
    case TokenKind::LParen: return "lparen";
    case TokenKind::RParen: return "rparen";
    case TokenKind::LBrace: return "lbrace";
    case TokenKind::RBrace: return "rbrace";
    case TokenKind::Comma: return "comma";
    case TokenKind::Colon: return "colon";
    case TokenKind::Semicolon: return "semi";
    case TokenKind::Dot: return "dot";
    case TokenKind::Arrow: return "arrow";
    case TokenKind::Equals: return "eq";
    case TokenKind::Question: return "question";
    case TokenKind::Underscore: return "underscore";
    case TokenKind::Plus: return "plus";
    case TokenKind::Minus: return "minus";
    case TokenKind::Star: return "star";
    case TokenKind::Slash: return "slash";
    case TokenKind::At: return "at";
    case TokenKind::Error: return "error:" + token.text;
    case TokenKind::End: return "end";
  }
  return "?";
}

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token tok;
      tok.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        tok.kind = TokenKind::End;
        out.push_back(std::move(tok));
        return out;
      }
      const char c = src_[pos_];
      if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
        lex_number(tok);
      } else if (is_ident_start(c)) {
        lex_word(tok);
      } else {
        lex_symbol(tok);
      }
      out.push_back(std::move(tok));
    }
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& tok) {
    const std::size_t start = pos_;
    bool is_float = false;
    while (is_digit(peek())) advance();
    if (peek() == '.' && is_digit(peek(1))) {
      is_float = true;
      advance();
      while (is_digit(peek())) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      const std::size_t save_pos = pos_;
      const std::size_t save_col = col_;
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (is_digit(peek())) {
        is_float = true;
        while (is_digit(peek())) advance();
      } else {
        pos_ = save_pos;
        col_ = save_col;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    // Long suffix `0L` and double suffix `1.0d` are accepted and ignored.
    if (!is_float && (peek() == 'L' || peek() == 'l') && !is_ident_char(peek(1))) {
      advance();
    } else if ((peek() == 'd' || peek() == 'D') && !is_ident_char(peek(1))) {
      advance();
      is_float = true;
    }
    tok.text = text;
    if (is_float) {
      tok.kind = TokenKind::Float;
      tok.number = std::strtod(text.c_str(), nullptr);
    } else {
      std::int64_t value = 0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
      if (res.ec != std::errc{}) {
        tok.kind = TokenKind::Error;
        tok.text = "integer literal out of range: " + text;
        return;
      }
      tok.kind = TokenKind::Integer;
      tok.integer = value;
      tok.number = static_cast<double>(value);
    }
  }

  void lex_word(Token& tok) {
    const std::size_t start = pos_;
    while (is_ident_char(peek())) advance();
    tok.text = std::string(src_.substr(start, pos_ - start));
    if (tok.text == "_") {
      tok.kind = TokenKind::Underscore;
    } else if (tok.text == "val") {
      tok.kind = TokenKind::KwVal;
    } else if (tok.text == "model") {
      tok.kind = TokenKind::KwModel;
    } else if (tok.text == "class") {
      tok.kind = TokenKind::KwClass;
    } else if (tok.text == "until") {
      tok.kind = TokenKind::KwUntil;
    } else if (tok.text == "to") {
      tok.kind = TokenKind::KwTo;
    } else {
      tok.kind = TokenKind::Identifier;
    }
  }

  void lex_symbol(Token& tok) {
    const char c = peek();
    auto single = [&](TokenKind kind) {
      tok.kind = kind;
      tok.text = std::string(1, c);
      advance();
    };
    switch (c) {
      case '(': return single(TokenKind::LParen);
      case ')': return single(TokenKind::RParen);
      case '{': return single(TokenKind::LBrace);
      case '}': return single(TokenKind::RBrace);
      case ',': return single(TokenKind::Comma);
      case ':': return single(TokenKind::Colon);
      case ';': return single(TokenKind::Semicolon);
      case '.': return single(TokenKind::Dot);
      case '?': return single(TokenKind::Question);
      case '+': return single(TokenKind::Plus);
      case '-': return single(TokenKind::Minus);
      case '*': return single(TokenKind::Star);
      case '/': return single(TokenKind::Slash);
      case '@': return single(TokenKind::At);
      case '=':
        if (peek(1) == '>') {
          tok.kind = TokenKind::Arrow;
          tok.text = "=>";
          advance();
          advance();
          return;
        }
        return single(TokenKind::Equals);
      default:
        break;
    }
    // Consume one whole UTF-8 sequence so a multi-byte character yields a
    // single error token.
    const auto lead = static_cast<unsigned char>(c);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, src_.size() - pos_);
    tok.kind = TokenKind::Error;
    tok.text = "unexpected character '" + std::string(src_.substr(pos_, len)) + "'";
    for (std::size_t i = 0; i < len; ++i) {
      ++pos_;
    }
    ++col_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace vmpforge::dsl
