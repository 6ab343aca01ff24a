#include "vmpforge/dsl/checker.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace vmpforge::dsl {

std::string_view to_string(TypeErrorKind kind) {
  switch (kind) {
    case TypeErrorKind::UnboundIdentifier: return "UnboundIdentifier";
    case TypeErrorKind::NonConjugateArgument: return "NonConjugateArgument";
    case TypeErrorKind::ArityMismatch: return "ArityMismatch";
    case TypeErrorKind::PlateMismatch: return "PlateMismatch";
    case TypeErrorKind::ForwardReference: return "ForwardReference";
  }
  return "?";
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Deterministic: return "deterministic";
    case Category::RvNode: return "rv-node";
    case Category::RvCollection: return "rv-collection";
    case Category::Plate: return "plate";
  }
  return "?";
}

std::optional<Category> TypedModel::category_of(const Expr& e) const {
  auto it = categories.find(&e);
  if (it == categories.end()) return std::nullopt;
  return it->second;
}

const NamedValue* TypedModel::find_binding(std::string_view name) const {
  for (auto it = bindings.rbegin(); it != bindings.rend(); ++it) {
    if (it->name == name) return &*it;
  }
  return nullptr;
}

namespace {

struct Value {
  enum class Tag { Error, Det, Plate, Rv, Mixture, PlateIndex };
  Tag tag = Tag::Error;

  ExprPtr det;
  ScalarKind det_kind = ScalarKind::Double;

  // Plate
  bool unknown = false;
  const Expr* question = nullptr;
  ExprPtr lo;
  ExprPtr hi;
  bool inclusive = false;

  // Rv and Mixture
  int rv = -1;
  int selector = -1;
  int selected_plate = -1;

  static Value error() { return {}; }
  static Value deterministic(ExprPtr e, ScalarKind kind) {
    Value v;
    v.tag = Tag::Det;
    v.det = std::move(e);
    v.det_kind = kind;
    return v;
  }
  static Value random(int rv) {
    Value v;
    v.tag = Tag::Rv;
    v.rv = rv;
    return v;
  }
};

class Checker {
 public:
  explicit Checker(const ModelAst& ast) {
    out_.model.ast = ast;
    out_.model.plates.push_back(PlateDecl{});
  }

  CheckResult run() {
    const ModelAst& ast = out_.model.ast;
    scopes_.emplace_back();
    for (const auto& p : ast.params) {
      scopes_.back()[p.name] =
          Value::deterministic(make_expr(Identifier{p.name}, p.loc), p.kind);
    }
    scopes_.emplace_back();
    for (std::size_t i = 0; i < ast.stmts.size(); ++i) {
      stmt_index_ = i;
      const Binding& b = ast.stmts[i];
      Value v = eval(*b.value, 0);
      scopes_.back()[b.name] = v;
      NamedValue named;
      named.name = b.name;
      switch (v.tag) {
        case Value::Tag::Det:
          named.category = Category::Deterministic;
          named.det = v.det;
          break;
        case Value::Tag::Plate:
          named.category = Category::Plate;
          break;
        case Value::Tag::Rv:
          named.rv = v.rv;
          named.category = free_plates(v.rv, 0).empty() ? Category::RvNode : Category::RvCollection;
          if (out_.model.rvs[v.rv].name.empty()) out_.model.rvs[v.rv].name = b.name;
          break;
        case Value::Tag::Mixture:
          report(b.value->loc, TypeErrorKind::NonConjugateArgument,
                 "an indexed mixture can only appear as a Categorical argument");
          continue;
        case Value::Tag::PlateIndex:
        case Value::Tag::Error:
          continue;
      }
      out_.model.bindings.push_back(std::move(named));
    }
    return std::move(out_);
  }

 private:
  using Scope = std::map<std::string, Value, std::less<>>;

  void report(SourceLocation loc, TypeErrorKind kind, std::string message) {
    out_.errors.push_back(TypeError{loc, kind, std::move(message)});
  }

  std::vector<int> chain(int plate) const {
    std::vector<int> out;
    for (int p = plate; p > 0; p = out_.model.plates[p].parent) out.push_back(p);
    std::reverse(out.begin(), out.end());
    return out;
  }

  bool encloses(int outer, int inner) const {
    for (int p = inner; p >= 0; p = out_.model.plates[p].parent) {
      if (p == outer) return true;
    }
    return false;
  }

  // Plates of `rv` that are not shared with the context `ctx`.
  std::vector<int> free_plates(int rv, int ctx) const {
    const std::vector<int> var_chain = chain(out_.model.rvs[rv].plate);
    const std::vector<int> ctx_chain = chain(ctx);
    std::size_t common = 0;
    while (common < var_chain.size() && common < ctx_chain.size() &&
           var_chain[common] == ctx_chain[common]) {
      ++common;
    }
    return {var_chain.begin() + static_cast<std::ptrdiff_t>(common), var_chain.end()};
  }

  void annotate(const Expr& e, const Value& v, int ctx) {
    switch (v.tag) {
      case Value::Tag::Det: out_.model.categories[&e] = Category::Deterministic; break;
      case Value::Tag::Plate:
      case Value::Tag::PlateIndex: out_.model.categories[&e] = Category::Plate; break;
      case Value::Tag::Rv:
        out_.model.categories[&e] =
            free_plates(v.rv, ctx).empty() ? Category::RvNode : Category::RvCollection;
        break;
      case Value::Tag::Mixture: out_.model.categories[&e] = Category::RvNode; break;
      case Value::Tag::Error: break;
    }
  }

  const Value* lookup(std::string_view name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return &found->second;
    }
    return nullptr;
  }

  Value eval(const Expr& e, int ctx) {
    Value v = std::visit([&](const auto& n) { return eval_node(n, e, ctx); }, e.node);
    annotate(e, v, ctx);
    return v;
  }

  Value eval_node(const Literal& n, const Expr& e, int) {
    return Value::deterministic(make_expr(n, e.loc),
                                n.integral ? ScalarKind::Long : ScalarKind::Double);
  }

  Value resolve(std::string_view name, const Expr& e) {
    const Value* v = lookup(name);
    if (v == nullptr) {
      const auto& stmts = out_.model.ast.stmts;
      for (std::size_t i = stmt_index_; i < stmts.size(); ++i) {
        if (stmts[i].name == name) {
          report(e.loc, TypeErrorKind::ForwardReference,
                 "'" + std::string(name) + "' is used before its definition");
          return Value::error();
        }
      }
      if (name == "_") {
        report(e.loc, TypeErrorKind::UnboundIdentifier, "'_' used outside a placeholder map");
      } else {
        report(e.loc, TypeErrorKind::UnboundIdentifier,
               "unbound identifier '" + std::string(name) + "'");
      }
      return Value::error();
    }
    if (v->tag == Value::Tag::PlateIndex) {
      report(e.loc, TypeErrorKind::PlateMismatch,
             "plate index '" + std::string(name) + "' cannot be used in an expression");
      return Value::error();
    }
    return *v;
  }

  Value eval_node(const Identifier& n, const Expr& e, int) { return resolve(n.name, e); }
  Value eval_node(const Placeholder&, const Expr& e, int) { return resolve("_", e); }

  Value eval_node(const UnknownPlate&, const Expr& e, int) {
    Value v;
    v.tag = Value::Tag::Plate;
    v.unknown = true;
    v.question = &e;
    return v;
  }

  Value require_det(const Expr& e, int ctx, std::string_view what) {
    Value v = eval(e, ctx);
    if (v.tag == Value::Tag::Error || v.tag == Value::Tag::Det) return v;
    report(e.loc, TypeErrorKind::NonConjugateArgument,
           std::string(what) + " must be a deterministic expression");
    return Value::error();
  }

  Value eval_node(const Unary& n, const Expr& e, int ctx) {
    Value operand = require_det(*n.operand, ctx, "arithmetic operand");
    if (operand.tag != Value::Tag::Det) return Value::error();
    return Value::deterministic(make_expr(Unary{n.op, operand.det}, e.loc), operand.det_kind);
  }

  Value eval_node(const Binary& n, const Expr& e, int ctx) {
    Value lhs = require_det(*n.lhs, ctx, "arithmetic operand");
    Value rhs = require_det(*n.rhs, ctx, "arithmetic operand");
    if (lhs.tag != Value::Tag::Det || rhs.tag != Value::Tag::Det) return Value::error();
    const ScalarKind kind = lhs.det_kind == ScalarKind::Long && rhs.det_kind == ScalarKind::Long
                                ? ScalarKind::Long
                                : ScalarKind::Double;
    return Value::deterministic(make_expr(Binary{n.op, lhs.det, rhs.det}, e.loc), kind);
  }

  Value eval_node(const Range& n, const Expr& e, int ctx) {
    Value lo = eval(*n.lo, ctx);
    Value hi = eval(*n.hi, ctx);
    bool ok = true;
    for (const auto* part : {&lo, &hi}) {
      if (part->tag == Value::Tag::Error) {
        ok = false;
      } else if (part->tag != Value::Tag::Det || part->det_kind != ScalarKind::Long) {
        report(e.loc, TypeErrorKind::PlateMismatch, "plate bounds must be Long expressions");
        ok = false;
        break;
      }
    }
    if (!ok) return Value::error();
    Value v;
    v.tag = Value::Tag::Plate;
    v.lo = lo.det;
    v.hi = hi.det;
    v.inclusive = n.inclusive;
    return v;
  }

  int new_rv(RvDecl decl) {
    out_.model.rvs.push_back(std::move(decl));
    return static_cast<int>(out_.model.rvs.size()) - 1;
  }

  Value eval_node(const Distribution& n, const Expr& e, int ctx) {
    RvDecl decl;
    decl.plate = ctx;
    decl.loc = e.loc;
    const std::string dist(to_string(n.name));
    switch (n.name) {
      case DistributionName::Dirichlet:
      case DistributionName::Beta: {
        const bool beta = n.name == DistributionName::Beta;
        const std::size_t arity = beta ? 1 : 2;
        if (n.args.size() != arity) {
          report(e.loc, TypeErrorKind::ArityMismatch,
                 dist + " takes " + std::to_string(arity) + " argument" + (beta ? "" : "s") +
                     ", got " + std::to_string(n.args.size()));
          for (const auto& a : n.args) eval(*a, ctx);
          return Value::error();
        }
        Value conc = require_det(*n.args[0], ctx, dist + " concentration");
        Value dim;
        if (!beta) {
          dim = require_det(*n.args[1], ctx, dist + " dimension");
          if (dim.tag == Value::Tag::Det && dim.det_kind != ScalarKind::Long) {
            report(n.args[1]->loc, TypeErrorKind::NonConjugateArgument,
                   "Dirichlet dimension must be a Long expression");
            return Value::error();
          }
        }
        if (conc.tag != Value::Tag::Det || (!beta && dim.tag != Value::Tag::Det)) {
          return Value::error();
        }
        decl.kind = RvKind::Dirichlet;
        decl.beta = beta;
        decl.concentration = conc.det;
        decl.dimension = beta ? make_expr(Literal{2.0, true}, e.loc) : dim.det;
        return Value::random(new_rv(std::move(decl)));
      }
      case DistributionName::Categorical: {
        if (n.args.size() != 1) {
          report(e.loc, TypeErrorKind::ArityMismatch,
                 "Categorical takes 1 argument, got " + std::to_string(n.args.size()));
          for (const auto& a : n.args) eval(*a, ctx);
          return Value::error();
        }
        const Expr& arg = *n.args[0];
        Value p = eval(arg, ctx);
        decl.kind = RvKind::Categorical;
        switch (p.tag) {
          case Value::Tag::Error: return Value::error();
          case Value::Tag::Rv:
            if (out_.model.rvs[p.rv].kind != RvKind::Dirichlet) {
              report(arg.loc, TypeErrorKind::NonConjugateArgument,
                     "Categorical argument must be Dirichlet- or Beta-distributed");
              return Value::error();
            }
            if (!free_plates(p.rv, ctx).empty()) {
              report(arg.loc, TypeErrorKind::PlateMismatch,
                     "Categorical argument is a collection; index it with a categorical "
                     "variable");
              return Value::error();
            }
            decl.prob_parent = p.rv;
            break;
          case Value::Tag::Mixture:
            decl.prob_parent = p.rv;
            decl.selector = p.selector;
            decl.selected_plate = p.selected_plate;
            break;
          default:
            report(arg.loc, TypeErrorKind::NonConjugateArgument,
                   "Categorical argument must be a Dirichlet- or Beta-distributed random "
                   "variable");
            return Value::error();
        }
        return Value::random(new_rv(std::move(decl)));
      }
    }
    return Value::error();
  }

  Value eval_node(const Apply& n, const Expr& e, int ctx) {
    Value callee = eval(*n.callee, ctx);
    std::vector<Value> args;
    for (const auto& a : n.args) args.push_back(eval(*a, ctx));
    if (args.size() != 1) {
      report(e.loc, TypeErrorKind::ArityMismatch,
             "only a single categorical index is supported, got " +
                 std::to_string(args.size()));
      return Value::error();
    }
    if (callee.tag == Value::Tag::Error || args[0].tag == Value::Tag::Error) {
      return Value::error();
    }
    if (callee.tag != Value::Tag::Rv) {
      report(n.callee->loc, TypeErrorKind::NonConjugateArgument,
             "only collections of random variables can be indexed");
      return Value::error();
    }
    const std::vector<int> free = free_plates(callee.rv, ctx);
    if (free.size() != 1) {
      report(e.loc, TypeErrorKind::ArityMismatch,
             free.empty() ? std::string("cannot index a single random variable")
                          : "indexing selects one plate but the collection has " +
                                std::to_string(free.size()) + " free plates");
      return Value::error();
    }
    if (out_.model.rvs[callee.rv].kind != RvKind::Dirichlet) {
      report(n.callee->loc, TypeErrorKind::NonConjugateArgument,
             "indexed mixture components must be Dirichlet- or Beta-distributed");
      return Value::error();
    }
    const Value& index = args[0];
    if (index.tag != Value::Tag::Rv || out_.model.rvs[index.rv].kind != RvKind::Categorical ||
        !free_plates(index.rv, ctx).empty()) {
      report(n.args[0]->loc, TypeErrorKind::NonConjugateArgument,
             "index must be a single Categorical random variable");
      return Value::error();
    }
    Value v;
    v.tag = Value::Tag::Mixture;
    v.rv = callee.rv;
    v.selector = index.rv;
    v.selected_plate = free[0];
    return v;
  }

  Value eval_node(const Map& n, const Expr&, int ctx) {
    Value recv = eval(*n.receiver, ctx);
    int inner = ctx;
    Value element = Value::error();
    bool ok = true;
    switch (recv.tag) {
      case Value::Tag::Error: ok = false; break;
      case Value::Tag::Plate: {
        if (recv.unknown) {
          if (!mapped_questions_.insert(recv.question).second) {
            report(n.receiver->loc, TypeErrorKind::PlateMismatch,
                   "the same '?' plate is mapped more than once; its size would be ambiguous");
            ok = false;
            break;
          }
        }
        PlateDecl plate;
        plate.parent = ctx;
        plate.unknown = recv.unknown;
        plate.lo = recv.lo;
        plate.hi = recv.hi;
        plate.inclusive = recv.inclusive;
        plate.loc = n.receiver->loc;
        out_.model.plates.push_back(std::move(plate));
        inner = static_cast<int>(out_.model.plates.size()) - 1;
        if (recv.unknown) out_.model.unknown_plates[recv.question] = inner;
        element.tag = Value::Tag::PlateIndex;
        break;
      }
      case Value::Tag::Rv: {
        const std::vector<int> free = free_plates(recv.rv, ctx);
        if (free.empty()) {
          report(n.receiver->loc, TypeErrorKind::PlateMismatch,
                 "cannot map over a single random variable");
          ok = false;
        } else if (out_.model.plates[free[0]].parent != ctx) {
          report(n.receiver->loc, TypeErrorKind::PlateMismatch,
                 "collection is not nested in the enclosing plate");
          ok = false;
        } else {
          inner = free[0];
          element = recv;
        }
        break;
      }
      default:
        report(n.receiver->loc, TypeErrorKind::PlateMismatch,
               "map receiver must be a plate or a collection of random variables");
        ok = false;
        break;
    }

    scopes_.emplace_back();
    if (n.binder_kind == BinderKind::Named) {
      scopes_.back()[n.binder] = element;
    } else if (n.binder_kind == BinderKind::Placeholder) {
      scopes_.back()["_"] = element;
    }
    Value body = eval(*n.body, inner);
    scopes_.pop_back();
    if (!ok || body.tag == Value::Tag::Error) return Value::error();

    if (body.tag != Value::Tag::Rv) {
      report(n.body->loc, body.tag == Value::Tag::Mixture ? TypeErrorKind::NonConjugateArgument
                                                          : TypeErrorKind::PlateMismatch,
             "map body must define a random variable");
      return Value::error();
    }
    if (!encloses(inner, out_.model.rvs[body.rv].plate)) {
      report(n.body->loc, TypeErrorKind::PlateMismatch,
             "map body must define a random variable inside the mapped plate");
      return Value::error();
    }
    return body;
  }

  Value eval_node(const Block& n, const Expr&, int ctx) {
    scopes_.emplace_back();
    for (const auto& b : n.stmts) {
      Value v = eval(*b.value, ctx);
      scopes_.back()[b.name] = v;
    }
    Value result = eval(*n.result, ctx);
    scopes_.pop_back();
    return result;
  }

  CheckResult out_;
  std::vector<Scope> scopes_;
  std::set<const Expr*> mapped_questions_;
  std::size_t stmt_index_ = 0;
};

}  // namespace

CheckResult check_types(const ModelAst& ast) { return Checker(ast).run(); }

}  // namespace vmpforge::dsl
