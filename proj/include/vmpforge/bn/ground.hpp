#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vmpforge/bn/plate_tree.hpp"

namespace vmpforge::bn {

using VertexId = std::uint64_t;

/// Observed category indices with their nesting. `levels[j]` lists the
/// per-repetition sizes at nesting depth j, outermost first, so
/// `levels[0]` has a single entry. `values` holds the leaves in order.
struct Observation {
  std::vector<std::int64_t> values;
  std::vector<std::vector<std::size_t>> levels;

  static Observation flat(std::vector<std::int64_t> values);
  static Observation nested(const std::vector<std::vector<std::int64_t>>& groups);

  std::size_t depth() const { return levels.size(); }
};

struct GroundPlate {
  int parent = -1;
  /// Prefix sums of per-repetition sizes, one entry per parent instance
  /// plus a trailing total.
  std::vector<std::size_t> offsets{0, 1};

  std::size_t flat_size() const { return offsets.back(); }
  std::size_t size_of(std::size_t repetition) const {
    return offsets[repetition + 1] - offsets[repetition];
  }
  /// Parent instance owning flattened index `index`.
  std::size_t owner(std::size_t index) const;
};

struct GroundVariable {
  int id = 0;
  std::string name;
  std::string internal_name;
  DistKind kind = DistKind::Dirichlet;
  int plate = 0;
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> prior;  // Dirichlet only, shared by every instance
  int prob_parent = -1;
  int selector = -1;
  int selected_plate = -1;
  bool observed = false;
  std::vector<std::int32_t> values;  // observed categoricals only
  VertexId lo = 0;
  VertexId hi = 0;

  const std::string& display_name() const { return name.empty() ? internal_name : name; }
};

using ParamValues = std::map<std::string, double, std::less<>>;

struct GroundNetwork {
  PlateTree tree;
  ParamValues params;
  std::vector<GroundPlate> plates;
  std::vector<GroundVariable> vars;
  std::size_t total_vertices = 0;
  bool laid_out = false;
  /// (lo, var) of every non-empty interval, sorted by lo.
  std::vector<std::pair<VertexId, int>> interval_starts;

  int find_var(std::string_view name) const { return tree.find_var(name); }
  const GroundVariable& var(std::string_view name) const;

  int variable_of(VertexId id) const;
  VertexId vertex(int var, std::size_t instance) const { return vars[var].lo + instance; }
  std::size_t instance_of(VertexId id) const { return id - vars[variable_of(id)].lo; }
  /// Same-index vertex of `target_var`; both variables must share a plate.
  VertexId companion(VertexId id, int target_var) const;

  /// Index at plate `ancestor` of flattened index `index` at `plate`.
  std::size_t ancestor_index(int plate, std::size_t index, int ancestor) const;
  /// Number of candidate prob parents of categorical `var`: the selector
  /// dimension, or 1 without a selector.
  std::size_t candidates(int var) const;
  /// Prob-parent instance of candidate `k` for instance `i` of `var`.
  std::size_t parent_instance(int var, std::size_t i, std::size_t k = 0) const;
  std::size_t selector_instance(int var, std::size_t i) const;
};

using ObservationMap = std::map<std::string, Observation, std::less<>>;
using PlateSizes = std::map<std::string, std::size_t, std::less<>>;

/// Resolves every plate size and attaches observations. `plate_sizes` gives
/// explicit sizes for `?` plates keyed by a variable whose innermost plate
/// it is. The result has no vertex layout yet.
GroundNetwork bind_data(const PlateTree& tree, const ParamValues& params,
                        const ObservationMap& observed, const PlateSizes& plate_sizes = {});

/// Lays variables out in reverse binding order starting at ID 0.
GroundNetwork assign_vertex_ids(GroundNetwork net);

inline GroundNetwork ground(const PlateTree& tree, const ParamValues& params,
                            const ObservationMap& observed, const PlateSizes& plate_sizes = {}) {
  return assign_vertex_ids(bind_data(tree, params, observed, plate_sizes));
}

/// Evaluates a deterministic expression closed over model parameters.
double evaluate(const dsl::Expr& expr, const PlateTree& tree, const ParamValues& params);

}  // namespace vmpforge::bn
