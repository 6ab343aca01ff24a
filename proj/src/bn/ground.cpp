#include "vmpforge/bn/ground.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace vmpforge::bn {

Observation Observation::flat(std::vector<std::int64_t> values) {
  Observation o;
  o.levels = {{values.size()}};
  o.values = std::move(values);
  return o;
}

Observation Observation::nested(const std::vector<std::vector<std::int64_t>>& groups) {
  Observation o;
  o.levels.push_back({groups.size()});
  o.levels.emplace_back();
  for (const auto& g : groups) {
    o.levels[1].push_back(g.size());
    o.values.insert(o.values.end(), g.begin(), g.end());
  }
  return o;
}

std::size_t GroundPlate::owner(std::size_t index) const {
  auto it = std::upper_bound(offsets.begin(), offsets.end(), index);
  return static_cast<std::size_t>(it - offsets.begin()) - 1;
}

const GroundVariable& GroundNetwork::var(std::string_view name) const {
  const int id = find_var(name);
  if (id < 0) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
  return vars[id];
}

int GroundNetwork::variable_of(VertexId id) const {
  if (!laid_out || id >= total_vertices) {
    throw Error(ErrorCode::InvalidArgument, "vertex " + std::to_string(id) + " out of range");
  }
  auto it = std::upper_bound(interval_starts.begin(), interval_starts.end(), id,
                             [](VertexId v, const auto& e) { return v < e.first; });
  return std::prev(it)->second;
}

VertexId GroundNetwork::companion(VertexId id, int target_var) const {
  const int v = variable_of(id);
  if (vars[v].plate != vars[target_var].plate) {
    throw Error(ErrorCode::InvalidArgument,
                vars[v].display_name() + " and " + vars[target_var].display_name() +
                    " are not in the same plate");
  }
  return id - vars[v].lo + vars[target_var].lo;
}

std::size_t GroundNetwork::ancestor_index(int plate, std::size_t index, int ancestor) const {
  while (plate != ancestor) {
    if (plate <= 0) throw Error(ErrorCode::InvalidArgument, "plate is not an ancestor");
    index = plates[plate].owner(index);
    plate = plates[plate].parent;
  }
  return index;
}

std::size_t GroundNetwork::candidates(int var) const {
  const GroundVariable& v = vars[var];
  return v.selector < 0 ? 1 : vars[v.selector].dim;
}

std::size_t GroundNetwork::parent_instance(int var, std::size_t i, std::size_t k) const {
  const GroundVariable& v = vars[var];
  const GroundVariable& parent = vars[v.prob_parent];
  if (v.selector < 0) return ancestor_index(v.plate, i, parent.plate);
  const GroundPlate& sel = plates[v.selected_plate];
  return sel.offsets[ancestor_index(v.plate, i, sel.parent)] + k;
}

std::size_t GroundNetwork::selector_instance(int var, std::size_t i) const {
  const GroundVariable& v = vars[var];
  return ancestor_index(v.plate, i, vars[v.selector].plate);
}

namespace {

struct Scalar {
  double value = 0.0;
  bool integral = false;
};

Scalar eval(const dsl::Expr& e, const PlateTree& tree, const ParamValues& params) {
  if (const auto* lit = std::get_if<dsl::Literal>(&e.node)) return {lit->value, lit->integral};
  if (const auto* id = std::get_if<dsl::Identifier>(&e.node)) {
    auto it = params.find(id->name);
    if (it == params.end()) {
      throw Error(ErrorCode::MissingParam, "missing value for parameter '" + id->name + "'");
    }
    bool integral = false;
    for (const auto& p : tree.params) {
      if (p.name == id->name) integral = p.kind == dsl::ScalarKind::Long;
    }
    return {it->second, integral};
  }
  if (const auto* u = std::get_if<dsl::Unary>(&e.node)) {
    Scalar s = eval(*u->operand, tree, params);
    if (u->op == '-') s.value = -s.value;
    return s;
  }
  if (const auto* b = std::get_if<dsl::Binary>(&e.node)) {
    const Scalar l = eval(*b->lhs, tree, params);
    const Scalar r = eval(*b->rhs, tree, params);
    const bool integral = l.integral && r.integral;
    switch (b->op) {
      case '+': return {l.value + r.value, integral};
      case '-': return {l.value - r.value, integral};
      case '*': return {l.value * r.value, integral};
      case '/':
        if (r.value == 0.0) throw Error(ErrorCode::DomainError, "division by zero at " + to_string(e.loc));
        return {integral ? std::trunc(l.value / r.value) : l.value / r.value, integral};
      default: break;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "not a deterministic expression at " + to_string(e.loc));
}

std::size_t eval_count(const dsl::Expr& e, const PlateTree& tree, const ParamValues& params,
                       const std::string& what) {
  const double v = evaluate(e, tree, params);
  if (!std::isfinite(v) || v < 0 || v != std::floor(v)) {
    throw Error(ErrorCode::DomainError, what + " must be a non-negative integer, got " +
                                            std::to_string(v));
  }
  return static_cast<std::size_t>(v);
}

void validate_shape(const std::string& name, const Observation& obs) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ShapeMismatch, "observation of '" + name + "': " + why);
  };
  if (obs.levels.empty() || obs.levels[0].size() != 1) fail("malformed nesting");
  for (std::size_t j = 0; j + 1 < obs.levels.size(); ++j) {
    const std::size_t total = std::accumulate(obs.levels[j].begin(), obs.levels[j].end(), std::size_t{0});
    if (obs.levels[j + 1].size() != total) fail("malformed nesting");
  }
  const std::size_t leaves =
      std::accumulate(obs.levels.back().begin(), obs.levels.back().end(), std::size_t{0});
  if (obs.values.size() != leaves) fail("malformed nesting");
}

std::string describe_plate_site(const PlateNode& p) {
  return (p.unknown ? std::string("'?' plate at ") : std::string("plate at ")) + to_string(p.loc);
}

}  // namespace

double evaluate(const dsl::Expr& expr, const PlateTree& tree, const ParamValues& params) {
  return eval(expr, tree, params).value;
}

GroundNetwork bind_data(const PlateTree& tree, const ParamValues& params,
                        const ObservationMap& observed, const PlateSizes& plate_sizes) {
  GroundNetwork net;
  net.tree = tree;

  for (const auto& p : tree.params) {
    auto it = params.find(p.name);
    if (it == params.end()) {
      throw Error(ErrorCode::MissingParam, "missing value for parameter '" + p.name + "'");
    }
    if (!std::isfinite(it->second)) {
      throw Error(ErrorCode::DomainError, "parameter '" + p.name + "' is not finite");
    }
    if (p.kind == dsl::ScalarKind::Long && it->second != std::floor(it->second)) {
      throw Error(ErrorCode::DomainError, "parameter '" + p.name + "' must be a Long");
    }
    net.params[p.name] = it->second;
  }
  for (const auto& [name, value] : params) {
    const bool known = std::any_of(tree.params.begin(), tree.params.end(),
                                   [&](const auto& p) { return p.name == name; });
    if (!known) throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + name + "'");
  }

  struct Bound {
    int var;
    const Observation* obs;
    std::vector<int> chain;
  };
  std::vector<Bound> bound;
  for (const auto& [name, obs] : observed) {
    const int id = tree.find_var(name);
    if (id < 0) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    if (tree.vars[id].kind != DistKind::Categorical) {
      throw Error(ErrorCode::InvalidArgument,
                  "only categorical variables can be observed, '" + name + "' is Dirichlet");
    }
    validate_shape(name, obs);
    std::vector<int> chain = tree.chain(tree.vars[id].plate);
    if (obs.depth() != std::max<std::size_t>(chain.size(), 1)) {
      throw Error(ErrorCode::ShapeMismatch,
                  "observation of '" + name + "' has nesting depth " + std::to_string(obs.depth()) +
                      " but the variable is in " + std::to_string(chain.size()) + " plate(s)");
    }
    bound.push_back({id, &obs, std::move(chain)});
  }
  std::vector<int> sized_by(tree.plates.size(), -1);
  for (const auto& [name, size] : plate_sizes) {
    const int id = tree.find_var(name);
    if (id < 0) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    const int plate = tree.vars[id].plate;
    if (plate == 0) {
      throw Error(ErrorCode::InvalidArgument, "'" + name + "' is not inside a plate");
    }
    sized_by[plate] = static_cast<int>(size);
  }

  net.plates.resize(tree.plates.size());
  for (std::size_t p = 1; p < tree.plates.size(); ++p) {
    const PlateNode& node = tree.plates[p];
    GroundPlate& gp = net.plates[p];
    gp.parent = node.parent;
    const std::size_t reps = net.plates[node.parent].flat_size();
    std::optional<std::vector<std::size_t>> sizes;
    std::string source;
    auto offer = [&](std::vector<std::size_t> candidate, const std::string& from) {
      if (!sizes) {
        sizes = std::move(candidate);
        source = from;
      } else if (*sizes != candidate) {
        throw Error(ErrorCode::ShapeMismatch, "size of the " + describe_plate_site(node) +
                                                  " from " + from + " conflicts with " + source);
      }
    };
    if (!node.unknown) {
      std::size_t n = eval_count(*node.hi, tree, net.params, "plate bound");
      const std::size_t lo = eval_count(*node.lo, tree, net.params, "plate bound");
      if (node.inclusive) ++n;
      offer(std::vector<std::size_t>(reps, n > lo ? n - lo : 0), "its bounds");
    }
    if (sized_by[p] >= 0) {
      offer(std::vector<std::size_t>(reps, static_cast<std::size_t>(sized_by[p])),
            "the explicit size");
    }
    for (const Bound& b : bound) {
      auto it = std::find(b.chain.begin(), b.chain.end(), static_cast<int>(p));
      if (it == b.chain.end()) continue;
      const auto& level = b.obs->levels[static_cast<std::size_t>(it - b.chain.begin())];
      if (level.size() != reps) {
        throw Error(ErrorCode::ShapeMismatch,
                    "observation of '" + tree.vars[b.var].display_name() + "' has " +
                        std::to_string(level.size()) + " groups where " + std::to_string(reps) +
                        " are expected");
      }
      offer(level, "the observation of '" + tree.vars[b.var].display_name() + "'");
    }
    if (!sizes) {
      throw Error(ErrorCode::UnresolvedPlate,
                  "cannot determine the size of the " + describe_plate_site(node) +
                      "; observe a variable in it or give its size explicitly");
    }
    gp.offsets.assign(reps + 1, 0);
    for (std::size_t r = 0; r < reps; ++r) gp.offsets[r + 1] = gp.offsets[r] + (*sizes)[r];
  }

  net.vars.resize(tree.vars.size());
  for (std::size_t i = 0; i < tree.vars.size(); ++i) {
    const RvNode& node = tree.vars[i];
    GroundVariable& v = net.vars[i];
    v.id = node.id;
    v.name = node.name;
    v.internal_name = node.internal_name;
    v.kind = node.kind;
    v.plate = node.plate;
    v.count = net.plates[node.plate].flat_size();
    v.prob_parent = node.prob_parent;
    v.selector = node.selector;
    v.selected_plate = node.selected_plate;
    if (node.kind == DistKind::Dirichlet) {
      const double conc = evaluate(*node.concentration, tree, net.params);
      if (!std::isfinite(conc) || conc <= 0) {
        throw Error(ErrorCode::DomainError, "concentration of '" + v.display_name() +
                                                "' must be positive, got " + std::to_string(conc));
      }
      v.dim = eval_count(*node.dimension, tree, net.params, "dimension of '" + v.display_name() + "'");
      if (v.dim < 2) {
        throw Error(ErrorCode::DomainError,
                    "dimension of '" + v.display_name() + "' must be at least 2");
      }
      v.prior.assign(v.dim, conc);
    } else {
      v.dim = net.vars[node.prob_parent].dim;
      if (node.selector >= 0) {
        const std::size_t k = net.vars[node.selector].dim;
        const GroundPlate& sel = net.plates[node.selected_plate];
        for (std::size_t r = 0; r + 1 < sel.offsets.size(); ++r) {
          if (sel.size_of(r) != k) {
            throw Error(ErrorCode::DimensionMismatch,
                        "selector '" + net.vars[node.selector].display_name() + "' has " +
                            std::to_string(k) + " categories but indexes a plate of size " +
                            std::to_string(sel.size_of(r)));
          }
        }
      }
    }
  }

  for (const Bound& b : bound) {
    GroundVariable& v = net.vars[b.var];
    v.observed = true;
    v.values.reserve(b.obs->values.size());
    for (std::int64_t x : b.obs->values) {
      if (x < 0 || static_cast<std::size_t>(x) >= v.dim) {
        throw Error(ErrorCode::DomainError, "observed value " + std::to_string(x) + " of '" +
                                                v.display_name() + "' is outside [0, " +
                                                std::to_string(v.dim) + ")");
      }
      v.values.push_back(static_cast<std::int32_t>(x));
    }
  }
  for (const auto& v : net.vars) net.total_vertices += v.count;
  return net;
}

GroundNetwork assign_vertex_ids(GroundNetwork net) {
  VertexId next = 0;
  net.interval_starts.clear();
  for (auto it = net.vars.rbegin(); it != net.vars.rend(); ++it) {
    it->lo = next;
    it->hi = next + it->count;
    next = it->hi;
    if (it->count > 0) net.interval_starts.emplace_back(it->lo, it->id);
  }
  net.total_vertices = next;
  net.laid_out = true;
  return net;
}

}  // namespace vmpforge::bn
