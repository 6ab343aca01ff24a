#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmpforge/bn/plate_tree.hpp"
#include "vmpforge/dsl/parser.hpp"
#include "vmpforge/graph/mpg.hpp"
#include "vmpforge/oracle/oracle.hpp"
#include "vmpforge/vmp/engine.hpp"

namespace vmpforge::cli {

namespace {

using nlohmann::json;

constexpr int kExitModel = 1;
constexpr int kExitUsage = 2;

// Raised after diagnostics have already been printed.
struct Reported {
  int code;
};

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int exit_code_of(ErrorCode code) {
  return code == ErrorCode::IoError || code == ErrorCode::InvalidArgument ? kExitUsage : kExitModel;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(flag) + " expects name=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::InvalidArgument, what + ": '" + text + "' is not a number");
  }
  return v;
}

std::int64_t parse_integer(const std::string& text, const std::string& what) {
  const double v = parse_number(text, what);
  if (v != static_cast<double>(static_cast<std::int64_t>(v))) {
    throw Error(ErrorCode::InvalidArgument, what + ": '" + text + "' is not an integer");
  }
  return static_cast<std::int64_t>(v);
}

void print_diagnostic(std::ostream& err, const std::string& path, const SourceLocation& loc,
                      std::string_view kind, const std::string& message) {
  err << path << ':' << loc.line << ':' << loc.column << ": " << kind << ": " << message << '\n';
}

// Parses and checks a model file, printing one diagnostic per problem.
bn::PlateTree compile(const std::string& path, std::ostream& err) {
  const std::string source = read_file(path);
  dsl::ModelAst ast;
  try {
    ast = dsl::parse_model(source);
  } catch (const dsl::ParseError& e) {
    print_diagnostic(err, path, e.location(), "ParseError", e.what());
    throw Reported{kExitModel};
  }
  dsl::CheckResult checked = dsl::check_types(ast);
  if (!checked.ok()) {
    for (const auto& e : checked.errors) print_diagnostic(err, path, e.loc, dsl::to_string(e.kind), e.message);
    throw Reported{kExitModel};
  }
  return bn::build_template(checked.model);
}

std::string default_observed_var(const bn::PlateTree& tree) {
  for (auto it = tree.vars.rbegin(); it != tree.vars.rend(); ++it) {
    if (it->kind == bn::DistKind::Categorical) return it->display_name();
  }
  throw Error(ErrorCode::InvalidArgument, "model has no categorical variable to observe");
}

bn::GroundNetwork build_network(const RunConfig& cfg, const bn::PlateTree& tree) {
  bn::ParamValues params;
  for (const auto& p : cfg.param_overrides) {
    auto [name, value] = split_assignment(p, "-P");
    params[name] = parse_number(value, "parameter '" + name + "'");
  }
  bn::PlateSizes sizes;
  for (const auto& p : cfg.plate_sizes) {
    auto [name, value] = split_assignment(p, "--plate");
    const std::int64_t n = parse_integer(value, "plate size of '" + name + "'");
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "plate size of '" + name + "' is negative");
    sizes[name] = static_cast<std::size_t>(n);
  }
  bn::ObservationMap observed;
  auto add = [&](const std::string& name, bn::Observation obs) {
    if (!observed.emplace(name, std::move(obs)).second) {
      throw Error(ErrorCode::InvalidArgument, "'" + name + "' is observed twice");
    }
  };
  for (const auto& d : cfg.data) {
    const auto eq = d.find('=');
    if (eq == std::string::npos) {
      add(default_observed_var(tree), load_observation(d));
    } else {
      add(d.substr(0, eq), load_observation(d.substr(eq + 1)));
    }
  }
  for (const auto& o : cfg.observe) {
    auto [name, list] = split_assignment(o, "--observe");
    std::vector<std::int64_t> values;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) values.push_back(parse_integer(item, "observation of '" + name + "'"));
    }
    add(name, bn::Observation::flat(std::move(values)));
  }
  return bn::ground(tree, params, observed, sizes);
}

std::vector<const bn::GroundVariable*> by_interval(const bn::GroundNetwork& net) {
  std::vector<const bn::GroundVariable*> vars;
  for (const auto& v : net.vars) vars.push_back(&v);
  std::stable_sort(vars.begin(), vars.end(), [](auto* a, auto* b) { return a->lo < b->lo; });
  return vars;
}

// ------------------------------------------------------------- subcommands

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const bn::PlateTree tree = compile(cfg.model_path, err);
  out << "model " << tree.model_name << ": ok\n";
  out << "plates: " << tree.describe() << '\n';
  for (const auto& v : tree.vars) {
    out << "  " << v.display_name() << " (" << v.internal_name << "): "
        << (v.kind == bn::DistKind::Dirichlet ? "Dirichlet" : "Categorical") << ", plate depth "
        << tree.depth(v.plate) << '\n';
  }
  return 0;
}

int cmd_graph(const RunConfig& cfg, bool dot, std::ostream& out, std::ostream& err) {
  const bn::PlateTree tree = compile(cfg.model_path, err);
  if (dot) {
    out << tree.to_dot();
    return 0;
  }
  const bn::GroundNetwork net = build_network(cfg, tree);
  const graph::MessagePassingGraph g = graph::build_graph(net);
  bool first = true;
  for (const auto* v : by_interval(net)) {
    if (!first) out << ' ';
    first = false;
    out << v->display_name() << ": [" << v->lo << ',' << v->hi << ')';
  }
  out << "; edges: " << g.edges.size() << '\n';
  for (const auto& c : graph::count_edge_types(net, g)) {
    out << "  " << c.src_var << " -> " << c.dst_var << ": " << c.count << '\n';
  }
  return 0;
}

json posteriors_json(const vmp::PosteriorSet& ps) {
  json j = json::object();
  for (const auto& v : ps.variables) {
    if (!v.observed) j[v.name.empty() ? v.internal_name : v.name] = v.params;
  }
  return j;
}

int cmd_infer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const bn::PlateTree tree = compile(cfg.model_path, err);
  const bn::GroundNetwork net = build_network(cfg, tree);

  vmp::InferOptions opts;
  opts.engine.seed = cfg.seed;
  opts.engine.workers = cfg.workers;
  opts.engine.strategy = cfg.strategy;
  opts.engine.partitions = cfg.partitions;
  opts.engine.zero_noise = cfg.zero_noise;
  opts.max_iterations = cfg.iterations;
  opts.snapshot_every = cfg.snapshot_every;
  opts.snapshot_path = cfg.snapshot_path;
  if (opts.snapshot_every != 0 && opts.snapshot_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--snapshot-every needs --snapshot-path");
  }
  if (!cfg.resume_path.empty()) {
    opts.resume = vmp::Snapshot::load(cfg.resume_path);
    if (opts.resume->seed != cfg.seed) {
      throw Error(ErrorCode::InvalidArgument, "snapshot was taken with seed " +
                                                  std::to_string(opts.resume->seed));
    }
  }
  vmp::Callback callback;
  if (cfg.stop_rel_elbo) callback = vmp::relative_elbo_stop(*cfg.stop_rel_elbo);

  const vmp::PosteriorSet ps = vmp::infer(net, opts, callback);

  json j;
  j["schemaVersion"] = 1;
  j["model"] = tree.model_name;
  j["seed"] = cfg.seed;
  j["iterations"] = ps.iterations_run;
  json trace = json::array();
  for (const auto& [it, elbo] : ps.elbo_trace) trace.push_back(elbo);
  j["elboTrace"] = std::move(trace);
  j["posteriors"] = posteriors_json(ps);
  const std::string text = j.dump(2) + '\n';

  if (!cfg.elbo_csv_path.empty()) {
    std::string csv = "iteration,elbo\n";
    for (const auto& [it, elbo] : ps.elbo_trace) csv += std::to_string(it) + ',' + format_double(elbo) + '\n';
    write_file(cfg.elbo_csv_path, csv);
  }
  const std::string final_line =
      "final ELBO: " + (ps.elbo_trace.empty() ? std::string("n/a") : format_double(ps.elbo_trace.back().second)) +
      '\n';
  if (cfg.output_path.empty()) {
    out << text;
    err << final_line;
  } else {
    write_file(cfg.output_path, text);
    out << final_line;
  }
  return 0;
}

struct StatsOptions {
  std::size_t seeds = 1;
  std::vector<std::string> strategies;
  std::string x_var;
  bool both_ends = false;
};

int cmd_partition_stats(const RunConfig& cfg, const StatsOptions& so, std::ostream& out,
                        std::ostream& err) {
  const bn::PlateTree tree = compile(cfg.model_path, err);
  const bn::GroundNetwork net = build_network(cfg, tree);
  const graph::MessagePassingGraph g = graph::build_graph(net);

  std::vector<graph::Strategy> strategies;
  const bool all = so.strategies.empty();
  if (all) {
    strategies.assign(std::begin(graph::kAllStrategies), std::end(graph::kAllStrategies));
  } else {
    for (const auto& s : so.strategies) {
      auto parsed = graph::parse_strategy(s);
      if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + s + "'");
      strategies.push_back(*parsed);
    }
  }

  std::string x_name = so.x_var;
  if (x_name.empty()) {
    const bn::GroundVariable* best = nullptr;
    for (const auto* v : by_interval(net)) {
      if (best == nullptr || v->count > best->count) best = v;
    }
    if (best != nullptr) x_name = best->display_name();
  } else {
    x_name = net.var(x_name).display_name();
  }
  const auto ordered = by_interval(net);

  std::ostringstream csv;
  csv << "strategy,M,seed,vertices,edges,meanReplX,maxReplX,maxPartitionVertices,edgeBalance,replByVar\n";
  for (graph::Strategy s : strategies) {
    if (s == graph::Strategy::EdgePartition2D && all) {
      const auto side = static_cast<std::uint32_t>(std::llround(std::sqrt(static_cast<double>(cfg.partitions))));
      if (side * side != cfg.partitions) {
        err << "skipping EdgePartition2D: " << cfg.partitions << " is not a perfect square\n";
        continue;
      }
    }
    for (std::size_t k = 0; k < so.seeds; ++k) {
      const std::uint64_t seed = cfg.seed + k;
      const auto assignment = graph::partition(net, g, s, cfg.partitions, seed);
      const auto stats = graph::replication_stats(net, g, assignment, so.both_ends);
      csv << graph::to_string(s) << ',' << cfg.partitions << ',' << seed << ',' << g.vertex_count << ','
          << g.edges.size() << ',' << format_double(stats.mean_replication.at(x_name)) << ','
          << stats.max_replication.at(x_name) << ',' << stats.max_partition_vertices << ','
          << format_double(stats.edge_balance) << ',';
      bool first = true;
      for (const auto* v : ordered) {
        if (!first) csv << ';';
        first = false;
        csv << v->display_name() << '=' << format_double(stats.mean_replication.at(v->display_name()));
      }
      csv << '\n';
    }
  }
  if (cfg.output_path.empty()) {
    out << csv.str();
  } else {
    write_file(cfg.output_path, csv.str());
  }
  return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const bn::PlateTree tree = compile(cfg.model_path, err);
  const bn::GroundNetwork net = build_network(cfg, tree);
  const oracle::ExactResult r = oracle::enumerate_discrete(net);
  json j;
  j["schemaVersion"] = 1;
  j["model"] = tree.model_name;
  j["logEvidence"] = r.log_evidence;
  j["marginals"] = r.marginals;
  j["posteriorParams"] = r.posterior_params;
  const std::string text = j.dump(2) + '\n';
  if (cfg.output_path.empty()) {
    out << text;
  } else {
    write_file(cfg.output_path, text);
  }
  return 0;
}

void add_binding_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("-P,--param", cfg.param_overrides, "Model parameter, name=value");
  sub->add_option("--plate", cfg.plate_sizes, "Size of a '?' plate, var=size");
  sub->add_option("--data", cfg.data, "Observation file, [var=]path (.txt or .json)");
  sub->add_option("--observe", cfg.observe, "Inline observations, var=v1,v2,...");
  sub->add_option("--seed", cfg.seed, "Random seed (default: $VMPFORGE_SEED or 0)");
  sub->add_option("-o,--output", cfg.output_path, "Output file (default: stdout)");
}

// Recursive JSON reader tracking per-depth repetition sizes.
void visit_json(const json& node, std::size_t depth, bn::Observation& obs,
                std::optional<std::size_t>& leaf_depth, const std::string& path) {
  if (node.is_array()) {
    if (obs.levels.size() <= depth) obs.levels.resize(depth + 1);
    obs.levels[depth].push_back(node.size());
    for (const auto& child : node) visit_json(child, depth + 1, obs, leaf_depth, path);
    return;
  }
  if (!node.is_number_integer() && !node.is_number_unsigned()) {
    throw Error(ErrorCode::InvalidArgument, "'" + path + "': observations must be integers");
  }
  if (leaf_depth && *leaf_depth != depth) {
    throw Error(ErrorCode::InvalidArgument, "'" + path + "': observations are nested unevenly");
  }
  leaf_depth = depth;
  obs.values.push_back(node.get<std::int64_t>());
}

}  // namespace

bn::Observation load_observation(const std::string& path) {
  const std::string text = read_file(path);
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (!is_json) {
    std::vector<std::int64_t> values;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line.erase(0, line.find_first_not_of(" \t\r"));
      line.erase(line.find_last_not_of(" \t\r") + 1);
      if (line.empty()) continue;
      values.push_back(parse_integer(line, "'" + path + "' line " + std::to_string(line_no)));
    }
    return bn::Observation::flat(std::move(values));
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "'" + path + "': " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "'" + path + "': expected a JSON array");
  bn::Observation obs;
  std::optional<std::size_t> leaf_depth;
  visit_json(j, 0, obs, leaf_depth, path);
  if (leaf_depth && *leaf_depth != obs.levels.size()) {
    throw Error(ErrorCode::InvalidArgument, "'" + path + "': observations are nested unevenly");
  }
  return obs;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (const char* env = std::getenv("VMPFORGE_SEED"); env != nullptr && *env != '\0') {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "vmpforge: VMPFORGE_SEED is not an unsigned integer\n";
      return kExitUsage;
    }
  }
  std::string strategy = "InferSparkRange";
  double stop_rel = 0.0;
  bool dot = false;
  StatsOptions stats;
  std::string strategies;

  CLI::App app{"Variational message passing for Dirichlet/categorical models", "vmpforge"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Parse and type-check a model");
  check->add_option("model", cfg.model_path)->required();

  auto* graph_cmd = app.add_subcommand("graph", "Summarise the grounded message passing graph");
  graph_cmd->add_option("model", cfg.model_path)->required();
  add_binding_options(graph_cmd, cfg);
  graph_cmd->add_flag("--dot", dot, "Print the plate tree as Graphviz DOT");

  auto* infer = app.add_subcommand("infer", "Run variational inference");
  infer->add_option("model", cfg.model_path)->required();
  add_binding_options(infer, cfg);
  infer->add_option("--iterations", cfg.iterations, "Maximum iterations")->check(CLI::NonNegativeNumber);
  infer->add_option("--partitions", cfg.partitions, "Partition count M")->check(CLI::PositiveNumber);
  infer->add_option("--strategy", strategy, "Partition strategy");
  infer->add_option("--workers", cfg.workers, "Worker threads, 0 for all cores");
  infer->add_option("--snapshot-every", cfg.snapshot_every, "Snapshot period in iterations");
  infer->add_option("--snapshot-path", cfg.snapshot_path, "Snapshot file");
  infer->add_option("--resume", cfg.resume_path, "Resume from a snapshot file");
  auto* stop_opt = infer->add_option("--stop-rel-elbo", stop_rel, "Stop on relative ELBO change below this");
  infer->add_option("--emit-elbo-csv", cfg.elbo_csv_path, "Write iteration,elbo pairs");
  infer->add_flag("--zero-noise", cfg.zero_noise, "Start latent categoricals exactly uniform");

  auto* pstats = app.add_subcommand("partition-stats", "Replication statistics per strategy and seed");
  pstats->add_option("model", cfg.model_path)->required();
  add_binding_options(pstats, cfg);
  pstats->add_option("--partitions", cfg.partitions, "Partition count M")->check(CLI::PositiveNumber);
  pstats->add_option("--seeds", stats.seeds, "Number of consecutive seeds");
  pstats->add_option("--strategies", strategies, "Comma-separated strategies (default: all)");
  pstats->add_option("--x-var", stats.x_var, "Variable reported as meanReplX");
  pstats->add_flag("--both-ends", stats.both_ends, "Count replicas at both edge ends");

  auto* oracle_cmd = app.add_subcommand("oracle", "Exact evidence and marginals by enumeration");
  oracle_cmd->add_option("model", cfg.model_path)->required();
  add_binding_options(oracle_cmd, cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    auto parsed = graph::parse_strategy(strategy);
    if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + strategy + "'");
    cfg.strategy = *parsed;
    if (stop_opt->count() > 0) cfg.stop_rel_elbo = stop_rel;
    std::stringstream ss(strategies);
    for (std::string s; std::getline(ss, s, ',');) {
      if (!s.empty()) stats.strategies.push_back(s);
    }

    if (check->parsed()) return cmd_check(cfg, out, err);
    if (graph_cmd->parsed()) return cmd_graph(cfg, dot, out, err);
    if (infer->parsed()) return cmd_infer(cfg, out, err);
    if (pstats->parsed()) return cmd_partition_stats(cfg, stats, out, err);
    return cmd_oracle(cfg, out, err);
  } catch (const Reported& r) {
    return r.code;
  } catch (const Error& e) {
    err << "vmpforge: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_of(e.code());
  } catch (const std::exception& e) {
    err << "vmpforge: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace vmpforge::cli
