#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vmpforge/graph/mpg.hpp"

namespace vmpforge::graph {

enum class Strategy {
  EdgePartition1D,
  EdgePartition2D,
  RandomVertexCut,
  CanonicalRandomVertexCut,
  InferSparkRange,
};

inline constexpr Strategy kAllStrategies[] = {
    Strategy::EdgePartition1D, Strategy::EdgePartition2D, Strategy::RandomVertexCut,
    Strategy::CanonicalRandomVertexCut, Strategy::InferSparkRange};

std::string_view to_string(Strategy s);
/// Accepts the identifiers above plus the short forms 1d, 2d, rvc, crvc, range.
std::optional<Strategy> parse_strategy(std::string_view text);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

struct PartitionAssignment {
  Strategy strategy = Strategy::InferSparkRange;
  std::uint32_t partitions = 1;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> edge_to_part;  // parallel to graph.edges
};

/// Throws Error(InvalidArgument) for M = 0 or a non-square M under 2D.
PartitionAssignment partition(const bn::GroundNetwork& net, const MessagePassingGraph& graph,
                              Strategy strategy, std::uint32_t partitions, std::uint64_t seed);

struct ReplicationStats {
  std::vector<std::uint32_t> per_vertex_replicas;
  std::size_t max_partition_vertices = 0;
  /// Mean and max replica count over the vertices of each variable, by
  /// display name.
  std::map<std::string, double> mean_replication;
  std::map<std::string, std::uint32_t> max_replication;
  double edge_balance = 0.0;  // max / mean edges per partition
  std::vector<std::size_t> edges_per_partition;
};

/// A vertex is replicated in every partition holding an edge whose
/// destination it is. With `both_ends` the source end counts as well.
ReplicationStats replication_stats(const bn::GroundNetwork& net, const MessagePassingGraph& graph,
                                   const PartitionAssignment& assignment, bool both_ends = false);

/// M(1 − (1 − 1/M)^(K+1)), the expected replica count of an observed
/// mixture vertex under hash partitioning.
double expected_hash_replication(double partitions, double components);

}  // namespace vmpforge::graph
