#include "vmpforge/vmp/schedule.hpp"

#include <algorithm>

namespace vmpforge::vmp {

std::string UpdateSchedule::describe(const bn::GroundNetwork& net) const {
  std::string out = "[";
  for (std::size_t s = 0; s < substeps.size(); ++s) {
    if (s > 0) out += ", ";
    out += "{";
    for (std::size_t i = 0; i < substeps[s].vars.size(); ++i) {
      if (i > 0) out += ", ";
      out += net.vars[substeps[s].vars[i]].display_name();
    }
    out += "}";
  }
  return out + "]";
}

UpdateSchedule derive_schedule(const bn::GroundNetwork& net) {
  const std::size_t n = net.vars.size();
  std::vector<int> depth(n, -1);
  std::vector<bool> visiting(n, false);

  auto selector_depth = [&](auto&& self, int v) -> int {
    if (depth[v] >= 0) return depth[v];
    if (visiting[v]) {
      throw Error(ErrorCode::CyclicModel,
                  "selector cycle through '" + net.vars[v].display_name() + "'");
    }
    visiting[v] = true;
    const int sel = net.vars[v].selector;
    int d = 0;
    if (sel >= 0 && !net.vars[sel].observed) d = self(self, sel) + 1;
    visiting[v] = false;
    depth[v] = d;
    return d;
  };

  UpdateSchedule schedule;
  Substep dirichlets;
  Substep refresh{Substep::Kind::Refresh, {}};
  int max_depth = -1;
  for (const auto& v : net.vars) {
    if (v.kind == bn::DistKind::Dirichlet) {
      dirichlets.vars.push_back(v.id);
      continue;
    }
    const int d = selector_depth(selector_depth, v.id);
    if (v.observed) {
      if (v.selector >= 0 && !net.vars[v.selector].observed) refresh.vars.push_back(v.id);
    } else {
      max_depth = std::max(max_depth, d);
    }
  }
  if (!dirichlets.vars.empty()) schedule.substeps.push_back(dirichlets);
  if (max_depth >= 0 && !refresh.vars.empty()) schedule.substeps.push_back(refresh);
  for (int d = max_depth; d >= 0; --d) {
    Substep layer;
    for (const auto& v : net.vars) {
      if (v.kind == bn::DistKind::Categorical && !v.observed && depth[v.id] == d) {
        layer.vars.push_back(v.id);
      }
    }
    if (layer.vars.empty()) continue;
    schedule.substeps.push_back(std::move(layer));
    if (!refresh.vars.empty()) schedule.substeps.push_back(refresh);
  }
  return schedule;
}

}  // namespace vmpforge::vmp
