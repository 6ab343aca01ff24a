#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmpforge/bn/ground.hpp"
#include "vmpforge/graph/mpg.hpp"
#include "vmpforge/graph/partition.hpp"
#include "vmpforge/vmp/schedule.hpp"

namespace vmpforge::vmp {

struct EngineOptions {
  std::uint64_t seed = 0;
  /// 0 picks the number of available cores.
  std::size_t workers = 0;
  graph::Strategy strategy = graph::Strategy::InferSparkRange;
  std::uint32_t partitions = 1;
  /// Start latent categoricals exactly uniform instead of perturbed.
  bool zero_noise = false;
};

struct VariablePosterior {
  std::string name;
  std::string internal_name;
  bn::DistKind kind = bn::DistKind::Dirichlet;
  bool observed = false;
  std::size_t dim = 0;
  /// Pseudo-counts for Dirichlet variables, probabilities for categorical
  /// ones, one row per instance. Empty for observed variables.
  std::vector<std::vector<double>> params;
};

struct PosteriorSet {
  std::vector<VariablePosterior> variables;
  std::vector<std::pair<std::size_t, double>> elbo_trace;
  std::size_t iterations_run = 0;
  std::uint64_t seed = 0;

  const VariablePosterior* find(std::string_view name) const;
};

/// Throws Error(UnknownVariable) or Error(ObservedVariable).
const std::vector<std::vector<double>>& get_result(const PosteriorSet& posteriors,
                                                   std::string_view name);

struct Snapshot {
  int schema_version = 1;
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
  /// Flattened variational parameters keyed by internal variable name.
  std::vector<std::pair<std::string, std::vector<double>>> variables;
  std::vector<std::pair<std::size_t, double>> elbo_trace;

  std::string to_json() const;
  static Snapshot from_json(std::string_view text);
  void save(const std::string& path) const;
  static Snapshot load(const std::string& path);
};

using bn::VertexId;

class Engine {
 public:
  explicit Engine(bn::GroundNetwork net, EngineOptions options = {});

  void init();
  void run_substep(const Substep& step);
  void run_iteration();
  double compute_elbo() const;

  /// Variational parameters of one latent instance.
  std::span<const double> state(int var, std::size_t instance) const;
  /// Overwrites one instance and refreshes dependent caches.
  void set_state(int var, std::size_t instance, std::span<const double> values);

  PosteriorSet posteriors() const;
  Snapshot snapshot(std::size_t iteration,
                    std::vector<std::pair<std::size_t, double>> elbo_trace) const;
  void restore(const Snapshot& snap);

  const bn::GroundNetwork& network() const { return net_; }
  const graph::MessagePassingGraph& graph() const { return graph_; }
  const graph::PartitionAssignment& assignment() const { return assignment_; }
  const UpdateSchedule& schedule() const { return schedule_; }
  std::size_t workers() const { return workers_; }

 private:
  struct Route {
    // Phase A: per partition, edges grouped by destination.
    struct Group {
      VertexId dst = 0;
      std::size_t edge_begin = 0;  // into edges
      std::size_t edge_end = 0;
      std::size_t partial = 0;  // offset into the partial buffer
    };
    std::vector<std::vector<Group>> groups;      // [partition]
    std::vector<std::vector<std::size_t>> edges;  // [partition] edge indices
    // Phase B: per destination, partial offsets in ascending partition order.
    std::vector<VertexId> dsts;
    std::vector<std::size_t> dst_offsets;
    std::vector<std::size_t> partials;
    std::size_t buffer_size = 0;
  };

  void build_routes();
  void refresh(int var);
  void refresh_instance(int var, std::size_t i);
  void update_expected_log(int var, std::size_t i);
  double selector_weight(int var, std::size_t i, std::size_t k) const;
  void add_message(const graph::Edge& e, std::span<double> acc) const;
  void apply_update(VertexId v, std::span<const double> incoming);
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) const;

  bn::GroundNetwork net_;
  EngineOptions options_;
  graph::MessagePassingGraph graph_;
  graph::PartitionAssignment assignment_;
  UpdateSchedule schedule_;
  std::size_t workers_ = 1;

  std::vector<int> vertex_var_;
  std::vector<std::vector<double>> state_;      // [var] count * dim, latent only
  std::vector<std::vector<double>> exp_log_;    // [var] Dirichlet only
  std::vector<std::vector<double>> weights_;    // [var] observed mixture: count * K
  std::vector<std::vector<double>> to_selector_;
  std::vector<std::vector<std::size_t>> parents_;   // [var] count * K parent instances
  std::vector<std::vector<std::size_t>> selectors_;  // [var] selector instance
  /// For each latent categorical: observed children it selects, grouped
  /// by selector instance as (child var, child instance).
  std::vector<std::vector<std::size_t>> child_offsets_;
  std::vector<std::vector<std::pair<int, std::size_t>>> children_;
  std::vector<Route> routes_;  // parallel to schedule_.substeps
  mutable std::vector<double> buffer_;
};

using Callback = std::function<bool(std::size_t iteration, double elbo)>;

/// Returns false (stop) once the ELBO changes by less than
/// `threshold` times its previous value.
Callback relative_elbo_stop(double threshold = 0.001);

struct InferOptions {
  EngineOptions engine;
  std::size_t max_iterations = 20;
  std::size_t snapshot_every = 0;
  std::string snapshot_path;
  std::optional<Snapshot> resume;
};

/// Runs the schedule up to `max_iterations` times. The callback sees the
/// post-initialisation ELBO as iteration 0 and returns false to stop.
PosteriorSet infer(const bn::GroundNetwork& net, const InferOptions& options,
                   const Callback& callback = {});

}  // namespace vmpforge::vmp
