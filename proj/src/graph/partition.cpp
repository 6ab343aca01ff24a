#include "vmpforge/graph/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace vmpforge::graph {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::EdgePartition1D: return "EdgePartition1D";
    case Strategy::EdgePartition2D: return "EdgePartition2D";
    case Strategy::RandomVertexCut: return "RandomVertexCut";
    case Strategy::CanonicalRandomVertexCut: return "CanonicalRandomVertexCut";
    case Strategy::InferSparkRange: return "InferSparkRange";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (Strategy s : kAllStrategies) {
    if (text == to_string(s)) return s;
  }
  if (text == "1d") return Strategy::EdgePartition1D;
  if (text == "2d") return Strategy::EdgePartition2D;
  if (text == "rvc") return Strategy::RandomVertexCut;
  if (text == "crvc") return Strategy::CanonicalRandomVertexCut;
  if (text == "range") return Strategy::InferSparkRange;
  return std::nullopt;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t hash1(std::uint64_t a, std::uint64_t salt) { return mix64(a ^ salt); }

std::uint64_t hash2(std::uint64_t a, std::uint64_t b, std::uint64_t salt) {
  return mix64(hash1(a, salt) ^ mix64(b));
}

struct RangeChoice {
  std::uint64_t count = 0;
  VertexId lo = 0;
  VertexId hi = 0;
};

}  // namespace

PartitionAssignment partition(const bn::GroundNetwork& net, const MessagePassingGraph& graph,
                              Strategy strategy, std::uint32_t partitions, std::uint64_t seed) {
  if (partitions == 0) throw Error(ErrorCode::InvalidArgument, "partition count must be >= 1");
  PartitionAssignment out;
  out.strategy = strategy;
  out.partitions = partitions;
  out.seed = seed;
  out.edge_to_part.resize(graph.edges.size());
  const std::uint64_t m = partitions;
  const std::uint64_t salt = mix64(seed);

  switch (strategy) {
    case Strategy::EdgePartition1D:
      for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        out.edge_to_part[i] = static_cast<std::uint32_t>(hash1(graph.edges[i].src, salt) % m);
      }
      break;
    case Strategy::EdgePartition2D: {
      const auto side = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(m))));
      if (side * side != m) {
        throw Error(ErrorCode::InvalidArgument,
                    "EdgePartition2D needs a perfect-square partition count, got " +
                        std::to_string(m));
      }
      const std::uint64_t row_salt = mix64(salt);
      for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const std::uint64_t col = hash1(graph.edges[i].src, salt) % side;
        const std::uint64_t row = hash1(graph.edges[i].dst, row_salt) % side;
        out.edge_to_part[i] = static_cast<std::uint32_t>(col * side + row);
      }
      break;
    }
    case Strategy::RandomVertexCut:
      for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const Edge& e = graph.edges[i];
        out.edge_to_part[i] = static_cast<std::uint32_t>(hash2(e.src, e.dst, salt) % m);
      }
      break;
    case Strategy::CanonicalRandomVertexCut:
      for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const Edge& e = graph.edges[i];
        const VertexId a = std::min(e.src, e.dst);
        const VertexId b = std::max(e.src, e.dst);
        out.edge_to_part[i] = static_cast<std::uint32_t>(hash2(a, b, salt) % m);
      }
      break;
    case Strategy::InferSparkRange: {
      std::vector<RangeChoice> by_var(net.vars.size());
      for (const auto& v : net.vars) by_var[v.id] = {v.count, v.lo, v.hi};
      for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const Edge& e = graph.edges[i];
        const RangeChoice& a = by_var[net.variable_of(e.src)];
        const RangeChoice& b = by_var[net.variable_of(e.dst)];
        const bool pick_src = a.count > b.count || (a.count == b.count && a.lo <= b.lo);
        const RangeChoice& r = pick_src ? a : b;
        const VertexId id = pick_src ? e.src : e.dst;
        const auto span = static_cast<unsigned __int128>(r.hi - r.lo);
        const auto part = static_cast<unsigned __int128>(id - r.lo) * m / span;
        out.edge_to_part[i] = static_cast<std::uint32_t>(part);
      }
      break;
    }
  }
  return out;
}

ReplicationStats replication_stats(const bn::GroundNetwork& net, const MessagePassingGraph& graph,
                                   const PartitionAssignment& assignment, bool both_ends) {
  ReplicationStats s;
  const std::size_t v_count = graph.vertex_count;
  const std::uint32_t m = assignment.partitions;
  s.per_vertex_replicas.assign(v_count, 0);
  s.edges_per_partition.assign(m, 0);
  for (std::uint32_t p : assignment.edge_to_part) ++s.edges_per_partition[p];

  std::vector<std::size_t> part_vertices(m, 0);
  if (m <= 64) {
    std::vector<std::uint64_t> dst_mask(v_count, 0);
    std::vector<std::uint64_t> any_mask(v_count, 0);
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
      const Edge& e = graph.edges[i];
      const std::uint64_t bit = std::uint64_t{1} << assignment.edge_to_part[i];
      dst_mask[e.dst] |= bit;
      any_mask[e.dst] |= bit;
      any_mask[e.src] |= bit;
    }
    for (std::size_t v = 0; v < v_count; ++v) {
      s.per_vertex_replicas[v] =
          static_cast<std::uint32_t>(std::popcount(both_ends ? any_mask[v] : dst_mask[v]));
      for (std::uint64_t mask = any_mask[v]; mask != 0; mask &= mask - 1) {
        ++part_vertices[static_cast<std::size_t>(std::countr_zero(mask))];
      }
    }
  } else {
    std::vector<std::pair<VertexId, std::uint32_t>> dst_pairs;
    std::vector<std::pair<VertexId, std::uint32_t>> any_pairs;
    dst_pairs.reserve(graph.edges.size());
    any_pairs.reserve(graph.edges.size() * 2);
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
      const Edge& e = graph.edges[i];
      const std::uint32_t p = assignment.edge_to_part[i];
      dst_pairs.emplace_back(e.dst, p);
      any_pairs.emplace_back(e.dst, p);
      any_pairs.emplace_back(e.src, p);
    }
    for (auto* pairs : {&dst_pairs, &any_pairs}) {
      std::sort(pairs->begin(), pairs->end());
      pairs->erase(std::unique(pairs->begin(), pairs->end()), pairs->end());
    }
    for (const auto& [v, p] : both_ends ? any_pairs : dst_pairs) ++s.per_vertex_replicas[v];
    for (const auto& [v, p] : any_pairs) ++part_vertices[p];
  }
  s.max_partition_vertices = *std::max_element(part_vertices.begin(), part_vertices.end());

  for (const auto& var : net.vars) {
    double total = 0.0;
    std::uint32_t mx = 0;
    for (VertexId v = var.lo; v < var.hi; ++v) {
      total += s.per_vertex_replicas[v];
      mx = std::max(mx, s.per_vertex_replicas[v]);
    }
    s.mean_replication[var.display_name()] = var.count == 0 ? 0.0 : total / static_cast<double>(var.count);
    s.max_replication[var.display_name()] = mx;
  }
  const double mean_edges = static_cast<double>(graph.edges.size()) / m;
  const auto max_edges = *std::max_element(s.edges_per_partition.begin(), s.edges_per_partition.end());
  s.edge_balance = mean_edges == 0.0 ? 0.0 : static_cast<double>(max_edges) / mean_edges;
  return s;
}

double expected_hash_replication(double partitions, double components) {
  return partitions * (1.0 - std::pow(1.0 - 1.0 / partitions, components + 1.0));
}

}  // namespace vmpforge::graph
