#pragma once

#include <string>
#include <vector>

#include "vmpforge/dsl/checker.hpp"

namespace vmpforge::bn {

enum class DistKind { Dirichlet, Categorical };

struct TreeChild {
  bool is_plate = false;
  int index = 0;
};

struct PlateNode {
  int id = 0;
  int parent = -1;  // -1 only for TOPLEVEL
  bool unknown = false;
  dsl::ExprPtr lo;
  dsl::ExprPtr hi;
  bool inclusive = false;
  SourceLocation loc;
  std::vector<TreeChild> children;  // in definition order
};

struct RvNode {
  int id = 0;
  std::string internal_name;  // r1, r2, ... in binding order
  std::string name;           // user identifier, may be empty
  DistKind kind = DistKind::Dirichlet;
  int plate = 0;
  dsl::ExprPtr concentration;
  dsl::ExprPtr dimension;
  bool beta = false;
  int prob_parent = -1;
  int selector = -1;
  int selected_plate = -1;

  const std::string& display_name() const { return name.empty() ? internal_name : name; }
};

struct PlateTree {
  std::string model_name;
  std::vector<dsl::Param> params;
  std::vector<PlateNode> plates;  // plates[0] is TOPLEVEL
  std::vector<RvNode> vars;       // binding order

  /// Looks up by user name first, then by internal name. -1 if absent.
  int find_var(std::string_view name) const;
  /// Plates from the outermost non-top plate down to `plate`.
  std::vector<int> chain(int plate) const;
  int depth(int plate) const { return static_cast<int>(chain(plate).size()); }

  /// e.g. `TOPLEVEL{r1(pi), Plate1(2){r2(phi)}, Plate2(?){r3(z), r4(x)}}`
  std::string describe() const;
  /// Graphviz rendering with plates as clusters.
  std::string to_dot() const;
};

PlateTree build_template(const dsl::TypedModel& model);

/// Parses, checks and builds in one step. Throws Error(ParseError) or an
/// Error listing the type errors.
PlateTree compile_model(std::string_view source);

}  // namespace vmpforge::bn
