#include "vmpforge/bn/plate_tree.hpp"

#include <algorithm>
#include <sstream>

#include "vmpforge/dsl/parser.hpp"

namespace vmpforge::bn {

int PlateTree::find_var(std::string_view name) const {
  for (const auto& v : vars) {
    if (v.name == name) return v.id;
  }
  for (const auto& v : vars) {
    if (v.internal_name == name) return v.id;
  }
  return -1;
}

std::vector<int> PlateTree::chain(int plate) const {
  std::vector<int> out;
  for (int p = plate; p > 0; p = plates[p].parent) out.push_back(p);
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

std::string size_text(const PlateNode& p) {
  if (p.unknown) return "?";
  const std::string hi = dsl::print_expr(*p.hi);
  const auto* lit = std::get_if<dsl::Literal>(&p.lo->node);
  std::string out = (lit != nullptr && lit->value == 0.0) ? hi
                                                          : hi + " - " + dsl::print_expr(*p.lo);
  if (p.inclusive) out += " + 1";
  return out;
}

void describe_plate(const PlateTree& tree, int id, std::ostringstream& os) {
  const PlateNode& p = tree.plates[id];
  os << (id == 0 ? std::string("TOPLEVEL") : "Plate" + std::to_string(id) + "(" + size_text(p) + ")");
  os << '{';
  for (std::size_t i = 0; i < p.children.size(); ++i) {
    if (i > 0) os << ", ";
    const TreeChild& c = p.children[i];
    if (c.is_plate) {
      describe_plate(tree, c.index, os);
    } else {
      const RvNode& v = tree.vars[c.index];
      os << v.internal_name << '(' << v.display_name() << ')';
    }
  }
  os << '}';
}

void dot_plate(const PlateTree& tree, int id, std::ostringstream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const PlateNode& p = tree.plates[id];
  if (id != 0) {
    os << pad << "subgraph cluster_plate" << id << " {\n";
    os << pad << "  label=\"" << size_text(p) << "\";\n";
  }
  for (const TreeChild& c : p.children) {
    if (c.is_plate) {
      dot_plate(tree, c.index, os, indent + 1);
    } else {
      const RvNode& v = tree.vars[c.index];
      os << pad << "  " << v.internal_name << " [label=\"" << v.display_name() << "\"];\n";
    }
  }
  if (id != 0) os << pad << "}\n";
}

}  // namespace

std::string PlateTree::describe() const {
  std::ostringstream os;
  describe_plate(*this, 0, os);
  return os.str();
}

std::string PlateTree::to_dot() const {
  std::ostringstream os;
  os << "digraph " << (model_name.empty() ? "model" : model_name) << " {\n";
  dot_plate(*this, 0, os, 0);
  for (const auto& v : vars) {
    if (v.prob_parent >= 0) {
      os << "  " << vars[v.prob_parent].internal_name << " -> " << v.internal_name << ";\n";
    }
    if (v.selector >= 0) {
      os << "  " << vars[v.selector].internal_name << " -> " << v.internal_name << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

PlateTree build_template(const dsl::TypedModel& model) {
  PlateTree tree;
  tree.model_name = model.ast.name;
  tree.params = model.ast.params;
  tree.plates.resize(model.plates.size());
  for (std::size_t i = 0; i < model.plates.size(); ++i) {
    const dsl::PlateDecl& d = model.plates[i];
    PlateNode& p = tree.plates[i];
    p.id = static_cast<int>(i);
    p.parent = d.parent;
    p.unknown = d.unknown;
    p.lo = d.lo;
    p.hi = d.hi;
    p.inclusive = d.inclusive;
    p.loc = d.loc;
  }
  // Plates and variables are both numbered in creation order, so merging
  // by source location keeps definition order within each plate.
  struct Item {
    SourceLocation loc;
    TreeChild child;
    int owner;
  };
  std::vector<Item> items;
  for (std::size_t i = 1; i < model.plates.size(); ++i) {
    items.push_back({model.plates[i].loc, {true, static_cast<int>(i)}, model.plates[i].parent});
  }
  tree.vars.resize(model.rvs.size());
  for (std::size_t i = 0; i < model.rvs.size(); ++i) {
    const dsl::RvDecl& d = model.rvs[i];
    RvNode& v = tree.vars[i];
    v.id = static_cast<int>(i);
    v.internal_name = "r" + std::to_string(i + 1);
    v.name = d.name;
    v.kind = d.kind == dsl::RvKind::Dirichlet ? DistKind::Dirichlet : DistKind::Categorical;
    v.plate = d.plate;
    v.concentration = d.concentration;
    v.dimension = d.dimension;
    v.beta = d.beta;
    v.prob_parent = d.prob_parent;
    v.selector = d.selector;
    v.selected_plate = d.selected_plate;
    items.push_back({d.loc, {false, static_cast<int>(i)}, d.plate});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.loc.line != b.loc.line) return a.loc.line < b.loc.line;
    return a.loc.column < b.loc.column;
  });
  for (const Item& it : items) tree.plates[it.owner].children.push_back(it.child);
  return tree;
}

PlateTree compile_model(std::string_view source) {
  dsl::ModelAst ast = dsl::parse_model(source);
  dsl::CheckResult checked = dsl::check_types(ast);
  if (!checked.ok()) {
    std::string msg;
    for (const auto& e : checked.errors) {
      if (!msg.empty()) msg += "; ";
      msg += to_string(e.loc) + ": " + std::string(to_string(e.kind)) + ": " + e.message;
    }
    throw Error(ErrorCode::TypeError, msg);
  }
  return build_template(checked.model);
}

}  // namespace vmpforge::bn
