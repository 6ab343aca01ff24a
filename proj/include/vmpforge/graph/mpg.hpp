#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vmpforge/bn/ground.hpp"

namespace vmpforge::graph {

using bn::VertexId;

enum class EdgeType : std::uint8_t {
  ProbToChild,      // Dirichlet parent -> categorical child
  ChildToProb,      // categorical child -> Dirichlet parent
  SelectorToChild,  // selector -> mixture child
  ChildToSelector,  // mixture child -> selector
};

std::string_view to_string(EdgeType type);

enum class EdgeRole : std::uint8_t { ParentToChild, ChildToParent };

EdgeRole role_of(EdgeType type);

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  EdgeType type = EdgeType::ProbToChild;
  /// Mixture component index of the Dirichlet endpoint for prob edges,
  /// 0 otherwise.
  std::uint32_t slot = 0;
};

/// Vertices are the ground network's vertex IDs. Edges are sorted by
/// (dst, src) and indexed by destination.
struct MessagePassingGraph {
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;
  std::vector<std::size_t> dst_offsets;  // vertex_count + 1 entries

  std::size_t in_degree(VertexId v) const { return dst_offsets[v + 1] - dst_offsets[v]; }
};

MessagePassingGraph build_graph(const bn::GroundNetwork& net);

struct EdgeTypeCount {
  std::string src_var;
  std::string dst_var;
  std::size_t count = 0;
};

/// Edge counts grouped by (source variable, destination variable), in
/// order of first appearance by source variable layout.
std::vector<EdgeTypeCount> count_edge_types(const bn::GroundNetwork& net,
                                            const MessagePassingGraph& graph);

}  // namespace vmpforge::graph
