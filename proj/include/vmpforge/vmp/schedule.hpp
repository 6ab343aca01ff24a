#pragma once

#include <string>
#include <vector>

#include "vmpforge/bn/ground.hpp"

namespace vmpforge::vmp {

struct Substep {
  enum class Kind {
    Update,   // recompute variational parameters of `vars`
    Refresh,  // recompute cached outgoing messages of observed `vars`
  };
  Kind kind = Kind::Update;
  std::vector<int> vars;
};

struct UpdateSchedule {
  std::vector<Substep> substeps;

  /// e.g. `[{pi, phi}, {x}, {z}, {x}]`
  std::string describe(const bn::GroundNetwork& net) const;
};

/// All Dirichlet variables first, then latent categorical layers from the
/// deepest selector level up, each followed by a refresh of the observed
/// variables whose selector is latent.
UpdateSchedule derive_schedule(const bn::GroundNetwork& net);

}  // namespace vmpforge::vmp
