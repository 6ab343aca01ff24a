#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "vmpforge/error.hpp"

namespace vmpforge::dsl {

enum class ScalarKind { Long, Double };

std::string_view to_string(ScalarKind kind);

struct Expr;
/// Expression trees are immutable once parsed, so subtrees are shared.
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  double value = 0.0;
  bool integral = false;
};

struct Identifier {
  std::string name;
};

/// The `_` placeholder of a binder-less `.map(...)` body.
struct Placeholder {};

/// The `?` plate of unknown size.
struct UnknownPlate {};

struct Unary {
  char op = '-';
  ExprPtr operand;
};

struct Binary {
  char op = '+';
  ExprPtr lhs;
  ExprPtr rhs;
};

/// `lo until hi` (half-open) or `lo to hi` (inclusive).
struct Range {
  ExprPtr lo;
  ExprPtr hi;
  bool inclusive = false;
};

enum class DistributionName { Dirichlet, Beta, Categorical };

std::string_view to_string(DistributionName name);

/// `Dirichlet(...)`, `Beta(...)`, `Categorical(...)`. Arity is checked by
/// the type checker, not the parser.
struct Distribution {
  DistributionName name = DistributionName::Categorical;
  std::vector<ExprPtr> args;
};

/// Indexed application `rv(arg)(arg)...`.
struct Apply {
  ExprPtr callee;
  std::vector<ExprPtr> args;
};

enum class BinderKind {
  Named,        // .map(x => body)
  Ignored,      // .map(_ => body)
  Placeholder,  // .map(_.map(...)) -- body refers to the element as `_`
  Absent,       // .map(body) -- element unused
};

struct Map {
  ExprPtr receiver;
  BinderKind binder_kind = BinderKind::Named;
  std::string binder;  // only for Named
  ExprPtr body;
};

struct Binding {
  std::string name;
  ExprPtr value;
  SourceLocation loc;
};

/// `{ val a = ...; expr }`
struct Block {
  std::vector<Binding> stmts;
  ExprPtr result;
};

struct Expr {
  using Node = std::variant<Literal, Identifier, Placeholder, UnknownPlate, Unary, Binary,
                            Range, Distribution, Apply, Map, Block>;
  Node node;
  SourceLocation loc;
};

struct Param {
  std::string name;
  ScalarKind kind = ScalarKind::Double;
  SourceLocation loc;
};

struct ModelAst {
  std::string name;
  std::vector<Param> params;
  std::vector<Binding> stmts;
  SourceLocation loc;
};

template <class T>
ExprPtr make_expr(T node, SourceLocation loc) {
  return std::make_shared<const Expr>(Expr{Expr::Node(std::move(node)), loc});
}

/// Structural equality: same tree shape, names and literal values.
/// Source locations are ignored.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const ModelAst& a, const ModelAst& b);

/// Canonical source rendering. Parsing the output yields a structurally
/// identical AST.
std::string print_expr(const Expr& expr);
std::string print_model(const ModelAst& model);

/// True when `expr` contains a `_` placeholder not claimed by a nested
/// binder-less map.
bool has_free_placeholder(const Expr& expr);

}  // namespace vmpforge::dsl
