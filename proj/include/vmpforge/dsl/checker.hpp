#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vmpforge/dsl/ast.hpp"

namespace vmpforge::dsl {

enum class TypeErrorKind {
  UnboundIdentifier,
  NonConjugateArgument,
  ArityMismatch,
  PlateMismatch,
  ForwardReference,
};

std::string_view to_string(TypeErrorKind kind);

struct TypeError {
  SourceLocation loc;
  TypeErrorKind kind = TypeErrorKind::UnboundIdentifier;
  std::string message;
};

enum class Category { Deterministic, RvNode, RvCollection, Plate };

std::string_view to_string(Category category);

enum class RvKind { Dirichlet, Categorical };

/// A plate introduced by mapping over a range or `?`. Plate 0 is the
/// implicit top level of size 1.
struct PlateDecl {
  int parent = -1;
  bool unknown = false;
  ExprPtr lo;  // closed over model parameters; null for `?` and the top level
  ExprPtr hi;
  bool inclusive = false;
  SourceLocation loc;
};

struct RvDecl {
  std::string name;  // first identifier bound to it, empty for anonymous
  RvKind kind = RvKind::Dirichlet;
  int plate = 0;
  SourceLocation loc;
  // Dirichlet: concentration and dimension, closed over model parameters.
  ExprPtr concentration;
  ExprPtr dimension;
  bool beta = false;
  // Categorical: prob-vector parent, optional selector indexing
  // `selected_plate` of the parent.
  int prob_parent = -1;
  int selector = -1;
  int selected_plate = -1;
};

struct NamedValue {
  std::string name;
  Category category = Category::Deterministic;
  int rv = -1;      // RvNode / RvCollection
  ExprPtr det;      // Deterministic
};

struct TypedModel {
  ModelAst ast;
  std::unordered_map<const Expr*, Category> categories;
  /// Plate created for each `?` occurrence that was mapped.
  std::unordered_map<const Expr*, int> unknown_plates;
  std::vector<PlateDecl> plates;
  std::vector<RvDecl> rvs;
  std::vector<NamedValue> bindings;  // top-level statements, in order

  std::optional<Category> category_of(const Expr& e) const;
  const NamedValue* find_binding(std::string_view name) const;
};

struct CheckResult {
  TypedModel model;
  std::vector<TypeError> errors;
  bool ok() const { return errors.empty(); }
};

/// Annotates every expression with its category and extracts the plate and
/// random-variable declarations. Reports every error found rather than
/// stopping at the first.
CheckResult check_types(const ModelAst& ast);

}  // namespace vmpforge::dsl
