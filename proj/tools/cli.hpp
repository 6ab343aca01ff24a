#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vmpforge/bn/ground.hpp"
#include "vmpforge/graph/partition.hpp"

namespace vmpforge::cli {

struct RunConfig {
  std::string model_path;
  std::vector<std::string> data;             // [var=]path
  std::vector<std::string> observe;          // var=v1,v2,...
  std::vector<std::string> param_overrides;  // name=value
  std::vector<std::string> plate_sizes;      // var=size
  std::size_t iterations = 20;
  std::uint64_t seed = 0;
  std::uint32_t partitions = 1;
  graph::Strategy strategy = graph::Strategy::InferSparkRange;
  std::size_t snapshot_every = 0;
  std::string snapshot_path;
  std::string resume_path;
  std::string output_path;
  std::size_t workers = 1;
  std::optional<double> stop_rel_elbo;
  std::string elbo_csv_path;
  bool zero_noise = false;
};

/// Reads observations: newline-delimited integers for `.txt`, nested JSON
/// arrays for `.json`.
bn::Observation load_observation(const std::string& path);

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 model or domain error, 2 I/O or usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vmpforge::cli
