#include "vmpforge/dsl/ast.hpp"

#include <iomanip>
#include <limits>
#include <sstream>

namespace vmpforge::dsl {

std::string_view to_string(ScalarKind kind) {
  return kind == ScalarKind::Long ? "Long" : "Double";
}

std::string_view to_string(DistributionName name) {
  switch (name) {
    case DistributionName::Dirichlet: return "Dirichlet";
    case DistributionName::Beta: return "Beta";
    case DistributionName::Categorical: return "Categorical";
  }
  return "?";
}

namespace {

bool same_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_structure(*a, *b);
}

bool same_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_ptr(a[i], b[i])) return false;
  }
  return true;
}

bool same_bindings(const std::vector<Binding>& a, const std::vector<Binding>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !same_ptr(a[i].value, b[i].value)) return false;
  }
  return true;
}

struct SameVisitor {
  const Expr::Node& other;

  bool operator()(const Literal& a) const {
    const auto& b = std::get<Literal>(other);
    return a.integral == b.integral && a.value == b.value;
  }
  bool operator()(const Identifier& a) const {
    return a.name == std::get<Identifier>(other).name;
  }
  bool operator()(const Placeholder&) const { return true; }
  bool operator()(const UnknownPlate&) const { return true; }
  bool operator()(const Unary& a) const {
    const auto& b = std::get<Unary>(other);
    return a.op == b.op && same_ptr(a.operand, b.operand);
  }
  bool operator()(const Binary& a) const {
    const auto& b = std::get<Binary>(other);
    return a.op == b.op && same_ptr(a.lhs, b.lhs) && same_ptr(a.rhs, b.rhs);
  }
  bool operator()(const Range& a) const {
    const auto& b = std::get<Range>(other);
    return a.inclusive == b.inclusive && same_ptr(a.lo, b.lo) && same_ptr(a.hi, b.hi);
  }
  bool operator()(const Distribution& a) const {
    const auto& b = std::get<Distribution>(other);
    return a.name == b.name && same_list(a.args, b.args);
  }
  bool operator()(const Apply& a) const {
    const auto& b = std::get<Apply>(other);
    return same_ptr(a.callee, b.callee) && same_list(a.args, b.args);
  }
  bool operator()(const Map& a) const {
    const auto& b = std::get<Map>(other);
    return a.binder_kind == b.binder_kind && a.binder == b.binder &&
           same_ptr(a.receiver, b.receiver) && same_ptr(a.body, b.body);
  }
  bool operator()(const Block& a) const {
    const auto& b = std::get<Block>(other);
    return same_bindings(a.stmts, b.stmts) && same_ptr(a.result, b.result);
  }
};

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  std::string s = os.str();
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

class Printer {
 public:
  std::string expr(const Expr& e, int indent) {
    return std::visit([&](const auto& n) { return print(n, indent); }, e.node);
  }

  std::string bindings(const std::vector<Binding>& stmts, int indent) {
    std::string out;
    for (const auto& b : stmts) {
      out += pad(indent) + "val " + b.name + " = " + expr(*b.value, indent) + "\n";
    }
    return out;
  }

 private:
  static std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

  std::string print(const Literal& n, int) {
    return n.integral ? std::to_string(static_cast<long long>(n.value)) : format_double(n.value);
  }
  std::string print(const Identifier& n, int) { return n.name; }
  std::string print(const Placeholder&, int) { return "_"; }
  std::string print(const UnknownPlate&, int) { return "?"; }
  std::string print(const Unary& n, int indent) {
    return std::string("(") + n.op + expr(*n.operand, indent) + ")";
  }
  std::string print(const Binary& n, int indent) {
    return "(" + expr(*n.lhs, indent) + " " + n.op + " " + expr(*n.rhs, indent) + ")";
  }
  std::string print(const Range& n, int indent) {
    return "(" + expr(*n.lo, indent) + (n.inclusive ? " to " : " until ") + expr(*n.hi, indent) +
           ")";
  }
  std::string print(const Distribution& n, int indent) {
    return std::string(to_string(n.name)) + args(n.args, indent);
  }
  std::string print(const Apply& n, int indent) {
    std::string out = expr(*n.callee, indent);
    for (const auto& a : n.args) out += "(" + expr(*a, indent) + ")";
    return out;
  }
  std::string print(const Map& n, int indent) {
    std::string head = expr(*n.receiver, indent) + ".map(";
    switch (n.binder_kind) {
      case BinderKind::Named: head += n.binder + " => "; break;
      case BinderKind::Ignored: head += "_ => "; break;
      case BinderKind::Placeholder:
      case BinderKind::Absent: break;
    }
    return head + expr(*n.body, indent) + ")";
  }
  std::string print(const Block& n, int indent) {
    std::string out = "{\n" + bindings(n.stmts, indent + 1);
    out += pad(indent + 1) + expr(*n.result, indent + 1) + "\n" + pad(indent) + "}";
    return out;
  }

  std::string args(const std::vector<ExprPtr>& list, int indent) {
    std::string out = "(";
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0) out += ", ";
      out += expr(*list[i], indent);
    }
    return out + ")";
  }
};

struct PlaceholderScan {
  bool operator()(const Literal&) const { return false; }
  bool operator()(const Identifier&) const { return false; }
  bool operator()(const Placeholder&) const { return true; }
  bool operator()(const UnknownPlate&) const { return false; }
  bool operator()(const Unary& n) const { return has_free_placeholder(*n.operand); }
  bool operator()(const Binary& n) const {
    return has_free_placeholder(*n.lhs) || has_free_placeholder(*n.rhs);
  }
  bool operator()(const Range& n) const {
    return has_free_placeholder(*n.lo) || has_free_placeholder(*n.hi);
  }
  bool operator()(const Distribution& n) const { return any(n.args); }
  bool operator()(const Apply& n) const { return has_free_placeholder(*n.callee) || any(n.args); }
  bool operator()(const Map& n) const {
    if (has_free_placeholder(*n.receiver)) return true;
    // A placeholder map owns the `_` occurrences of its own body.
    return n.binder_kind != BinderKind::Placeholder && has_free_placeholder(*n.body);
  }
  bool operator()(const Block& n) const {
    for (const auto& b : n.stmts) {
      if (has_free_placeholder(*b.value)) return true;
    }
    return has_free_placeholder(*n.result);
  }

  static bool any(const std::vector<ExprPtr>& list) {
    for (const auto& e : list) {
      if (has_free_placeholder(*e)) return true;
    }
    return false;
  }
};

}  // namespace

bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(SameVisitor{b.node}, a.node);
}

bool same_structure(const ModelAst& a, const ModelAst& b) {
  if (a.name != b.name || a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name || a.params[i].kind != b.params[i].kind) {
      return false;
    }
  }
  return same_bindings(a.stmts, b.stmts);
}

std::string print_expr(const Expr& expr) { return Printer{}.expr(expr, 0); }

std::string print_model(const ModelAst& model) {
  std::string out = "model " + model.name + "(";
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    if (i > 0) out += ", ";
    out += model.params[i].name + ": " + std::string(to_string(model.params[i].kind));
  }
  out += ") {\n" + Printer{}.bindings(model.stmts, 1) + "}\n";
  return out;
}

bool has_free_placeholder(const Expr& expr) { return std::visit(PlaceholderScan{}, expr.node); }

}  // namespace vmpforge::dsl
