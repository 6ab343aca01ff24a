#include "vmpforge/dsl/parser.hpp"

#include <utility>

#include "vmpforge/dsl/lexer.hpp"

namespace vmpforge::dsl {

namespace {

std::string join_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0) out += (i + 1 == expected.size()) ? " or " : ", ";
    out += "'" + expected[i] + "'";
  }
  return out;
}

std::string describe_found(const Token& tok) {
  switch (tok.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::Error: return tok.text;
    default: return "'" + tok.text + "'";
  }
}

}  // namespace

ParseError::ParseError(SourceLocation loc, std::vector<std::string> expected, std::string found,
                       const std::string& message)
    : Error(ErrorCode::ParseError, message),
      loc_(loc),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ModelAst model() {
    ModelAst m;
    m.loc = cur().loc;
    if (accept(TokenKind::At)) {
      const Token& ann = expect(TokenKind::Identifier, {"Model"});
      if (ann.text != "Model") fail({"Model"}, ann);
      expect(TokenKind::KwClass, {"class"});
    } else if (!accept(TokenKind::KwModel)) {
      expect(TokenKind::KwClass, {"model", "class", "@"});
    }
    m.name = expect(TokenKind::Identifier, {"identifier"}).text;
    expect(TokenKind::LParen, {"("});
    if (!check(TokenKind::RParen)) {
      do {
        m.params.push_back(param());
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RParen, {",", ")"});
    expect(TokenKind::LBrace, {"{"});
    m.stmts = statements(/*require_one=*/true);
    expect(TokenKind::RBrace, {"val", "}"});
    expect(TokenKind::End, {"end of input"});
    return m;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t n) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  bool check(TokenKind k) const { return cur().kind == k; }

  bool accept(TokenKind k) {
    if (!check(k)) return false;
    ++pos_;
    return true;
  }

  const Token& expect(TokenKind k, std::vector<std::string> expected) {
    if (!check(k)) fail(std::move(expected), cur());
    return toks_[pos_++];
  }

  [[noreturn]] void fail(std::vector<std::string> expected, const Token& found,
                         const std::string& detail = {}) {
    std::string msg = detail.empty()
                          ? "expected " + join_expected(expected) + " but found " + describe_found(found)
                          : detail;
    throw ParseError(found.loc, std::move(expected), describe_found(found), msg);
  }

  Param param() {
    Param p;
    p.loc = cur().loc;
    p.name = expect(TokenKind::Identifier, {"identifier"}).text;
    expect(TokenKind::Colon, {":"});
    const Token& type = expect(TokenKind::Identifier, {"Long", "Double"});
    if (type.text == "Long") {
      p.kind = ScalarKind::Long;
    } else if (type.text == "Double") {
      p.kind = ScalarKind::Double;
    } else {
      fail({"Long", "Double"}, type);
    }
    return p;
  }

  std::vector<Binding> statements(bool require_one) {
    std::vector<Binding> out;
    if (require_one && !check(TokenKind::KwVal)) fail({"val"}, cur());
    while (check(TokenKind::KwVal)) {
      out.push_back(binding());
      while (accept(TokenKind::Semicolon)) {
      }
    }
    return out;
  }

  Binding binding() {
    Binding b;
    b.loc = cur().loc;
    expect(TokenKind::KwVal, {"val"});
    b.name = expect(TokenKind::Identifier, {"identifier"}).text;
    expect(TokenKind::Equals, {"="});
    b.value = expr();
    return b;
  }

  ExprPtr expr() { return range(); }

  ExprPtr range() {
    ExprPtr lo = additive();
    if (check(TokenKind::KwUntil) || check(TokenKind::KwTo)) {
      const bool inclusive = check(TokenKind::KwTo);
      ++pos_;
      ExprPtr hi = additive();
      const SourceLocation loc = lo->loc;
      return make_expr(Range{std::move(lo), std::move(hi), inclusive}, loc);
    }
    return lo;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (check(TokenKind::Plus) || check(TokenKind::Minus)) {
      const char op = check(TokenKind::Plus) ? '+' : '-';
      ++pos_;
      ExprPtr rhs = multiplicative();
      const SourceLocation loc = lhs->loc;
      lhs = make_expr(Binary{op, std::move(lhs), std::move(rhs)}, loc);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = unary();
    while (check(TokenKind::Star) || check(TokenKind::Slash)) {
      const char op = check(TokenKind::Star) ? '*' : '/';
      ++pos_;
      ExprPtr rhs = unary();
      const SourceLocation loc = lhs->loc;
      lhs = make_expr(Binary{op, std::move(lhs), std::move(rhs)}, loc);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (check(TokenKind::Plus) || check(TokenKind::Minus)) {
      const SourceLocation loc = cur().loc;
      const char op = check(TokenKind::Plus) ? '+' : '-';
      ++pos_;
      return make_expr(Unary{op, unary()}, loc);
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    for (;;) {
      if (check(TokenKind::Dot)) {
        ++pos_;
        const Token& method = cur();
        if (method.kind == TokenKind::Identifier && method.text == "zip") {
          fail({"map"}, method, "zip/tuple patterns are not supported; only .map is allowed");
        }
        if (method.kind != TokenKind::Identifier || method.text != "map") fail({"map"}, method);
        ++pos_;
        e = map_call(std::move(e));
      } else if (check(TokenKind::LParen)) {
        const SourceLocation loc = e->loc;
        Apply app{e, {}};
        while (accept(TokenKind::LParen)) {
          app.args.push_back(expr());
          expect(TokenKind::RParen, {")"});
        }
        e = make_expr(std::move(app), loc);
      } else {
        return e;
      }
    }
  }

  bool lambda_ahead() const {
    return (check(TokenKind::Identifier) || check(TokenKind::Underscore)) &&
           ahead(1).kind == TokenKind::Arrow;
  }

  ExprPtr map_call(ExprPtr receiver) {
    const SourceLocation loc = receiver->loc;
    Map m;
    m.receiver = std::move(receiver);
    const bool braces = check(TokenKind::LBrace);
    if (!braces && !check(TokenKind::LParen)) fail({"(", "{"}, cur());
    ++pos_;
    bool has_binder = false;
    if (lambda_ahead()) {
      has_binder = true;
      if (check(TokenKind::Underscore)) {
        m.binder_kind = BinderKind::Ignored;
      } else {
        m.binder_kind = BinderKind::Named;
        m.binder = cur().text;
      }
      pos_ += 2;
    }
    if (braces) {
      m.body = block_body(loc);
      expect(TokenKind::RBrace, {"}"});
    } else {
      m.body = expr();
      expect(TokenKind::RParen, {")"});
    }
    if (!has_binder) {
      m.binder_kind =
          has_free_placeholder(*m.body) ? BinderKind::Placeholder : BinderKind::Absent;
    }
    return make_expr(std::move(m), loc);
  }

  // Contents of `{ ... }` up to (not including) the closing brace.
  ExprPtr block_body(SourceLocation loc) {
    std::vector<Binding> stmts = statements(/*require_one=*/false);
    if (check(TokenKind::RBrace)) fail({"expression"}, cur());
    ExprPtr result = expr();
    while (accept(TokenKind::Semicolon)) {
    }
    if (stmts.empty()) return result;
    return make_expr(Block{std::move(stmts), std::move(result)}, loc);
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Integer:
        ++pos_;
        return make_expr(Literal{t.number, true}, t.loc);
      case TokenKind::Float:
        ++pos_;
        return make_expr(Literal{t.number, false}, t.loc);
      case TokenKind::Question:
        ++pos_;
        return make_expr(UnknownPlate{}, t.loc);
      case TokenKind::Underscore:
        ++pos_;
        return make_expr(Placeholder{}, t.loc);
      case TokenKind::LParen: {
        ++pos_;
        ExprPtr inner = expr();
        expect(TokenKind::RParen, {")"});
        return inner;
      }
      case TokenKind::LBrace: {
        ++pos_;
        ExprPtr inner = block_body(t.loc);
        expect(TokenKind::RBrace, {"}"});
        return inner;
      }
      case TokenKind::Identifier: {
        ++pos_;
        if (check(TokenKind::LParen)) {
          if (t.text == "Dirichlet") return distribution(DistributionName::Dirichlet, t.loc);
          if (t.text == "Beta") return distribution(DistributionName::Beta, t.loc);
          if (t.text == "Categorical") return distribution(DistributionName::Categorical, t.loc);
        }
        return make_expr(Identifier{t.text}, t.loc);
      }
      default:
        fail({"expression"}, t);
    }
  }

  ExprPtr distribution(DistributionName name, SourceLocation loc) {
    Distribution d{name, {}};
    expect(TokenKind::LParen, {"("});
    if (!check(TokenKind::RParen)) {
      do {
        d.args.push_back(expr());
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RParen, {",", ")"});
    return make_expr(std::move(d), loc);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ModelAst parse_model(std::string_view source) { return Parser(tokenize(source)).model(); }

}  // namespace vmpforge::dsl
