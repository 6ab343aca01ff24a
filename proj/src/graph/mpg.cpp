#include "vmpforge/graph/mpg.hpp"

#include <algorithm>
#include <map>

namespace vmpforge::graph {

std::string_view to_string(EdgeType type) {
  switch (type) {
    case EdgeType::ProbToChild: return "prob->child";
    case EdgeType::ChildToProb: return "child->prob";
    case EdgeType::SelectorToChild: return "selector->child";
    case EdgeType::ChildToSelector: return "child->selector";
  }
  return "?";
}

EdgeRole role_of(EdgeType type) {
  return (type == EdgeType::ProbToChild || type == EdgeType::SelectorToChild)
             ? EdgeRole::ParentToChild
             : EdgeRole::ChildToParent;
}

MessagePassingGraph build_graph(const bn::GroundNetwork& net) {
  if (!net.laid_out) throw Error(ErrorCode::InvalidArgument, "vertex IDs are not assigned");
  MessagePassingGraph g;
  g.vertex_count = net.total_vertices;
  for (const auto& v : net.vars) {
    if (v.kind != bn::DistKind::Categorical) continue;
    const std::size_t k_count = net.candidates(v.id);
    const auto& parent = net.vars[v.prob_parent];
    for (std::size_t i = 0; i < v.count; ++i) {
      const VertexId child = v.lo + i;
      for (std::size_t k = 0; k < k_count; ++k) {
        const VertexId p = parent.lo + net.parent_instance(v.id, i, k);
        const auto slot = static_cast<std::uint32_t>(v.selector < 0 ? 0 : k);
        g.edges.push_back({p, child, EdgeType::ProbToChild, slot});
        g.edges.push_back({child, p, EdgeType::ChildToProb, slot});
      }
      if (v.selector >= 0) {
        const VertexId s = net.vars[v.selector].lo + net.selector_instance(v.id, i);
        g.edges.push_back({s, child, EdgeType::SelectorToChild, 0});
        g.edges.push_back({child, s, EdgeType::ChildToSelector, 0});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
  });
  g.dst_offsets.assign(g.vertex_count + 1, 0);
  for (const Edge& e : g.edges) ++g.dst_offsets[e.dst + 1];
  for (std::size_t v = 0; v < g.vertex_count; ++v) g.dst_offsets[v + 1] += g.dst_offsets[v];
  return g;
}

std::vector<EdgeTypeCount> count_edge_types(const bn::GroundNetwork& net,
                                            const MessagePassingGraph& graph) {
  std::map<std::pair<int, int>, std::size_t> counts;
  for (const Edge& e : graph.edges) ++counts[{net.variable_of(e.src), net.variable_of(e.dst)}];
  std::vector<std::pair<std::pair<int, int>, std::size_t>> ordered(counts.begin(), counts.end());
  std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
    const auto la = std::make_pair(net.vars[a.first.first].lo, net.vars[a.first.second].lo);
    const auto lb = std::make_pair(net.vars[b.first.first].lo, net.vars[b.first.second].lo);
    return la < lb;
  });
  std::vector<EdgeTypeCount> out;
  for (const auto& [key, n] : ordered) {
    out.push_back({net.vars[key.first].display_name(), net.vars[key.second].display_name(), n});
  }
  return out;
}

}  // namespace vmpforge::graph
