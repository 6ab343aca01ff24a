#include "vmpforge/vmp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vmpforge/expfam/expfamily.hpp"

namespace vmpforge::vmp {

using graph::Edge;
using graph::EdgeType;

const VariablePosterior* PosteriorSet::find(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  for (const auto& v : variables) {
    if (v.internal_name == name) return &v;
  }
  return nullptr;
}

const std::vector<std::vector<double>>& get_result(const PosteriorSet& posteriors,
                                                   std::string_view name) {
  const VariablePosterior* v = posteriors.find(name);
  if (v == nullptr) {
    throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
  }
  if (v->observed) {
    throw Error(ErrorCode::ObservedVariable,
                "'" + std::string(name) + "' is observed and has no posterior");
  }
  return v->params;
}

// ---------------------------------------------------------------- snapshots

std::string Snapshot::to_json() const {
  nlohmann::json j;
  j["schemaVersion"] = schema_version;
  j["iteration"] = iteration;
  j["seed"] = seed;
  nlohmann::json vars = nlohmann::json::object();
  for (const auto& [name, values] : variables) vars[name] = values;
  j["variables"] = std::move(vars);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& [it, elbo] : elbo_trace) trace.push_back({it, elbo});
  j["elboTrace"] = std::move(trace);
  return j.dump();
}

Snapshot Snapshot::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Snapshot s;
    s.schema_version = j.at("schemaVersion").get<int>();
    if (s.schema_version != 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "unsupported snapshot schema version " + std::to_string(s.schema_version));
    }
    s.iteration = j.at("iteration").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [name, values] : j.at("variables").items()) {
      s.variables.emplace_back(name, values.get<std::vector<double>>());
    }
    for (const auto& entry : j.at("elboTrace")) {
      s.elbo_trace.emplace_back(entry.at(0).get<std::size_t>(), entry.at(1).get<double>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed snapshot: ") + e.what());
  }
}

void Snapshot::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write snapshot '" + tmp + "'");
    out << to_json() << '\n';
    if (!out) throw Error(ErrorCode::IoError, "cannot write snapshot '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot write snapshot '" + path + "': " + ec.message());
}

Snapshot Snapshot::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read snapshot '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ------------------------------------------------------------------- engine

namespace {

double noise_uniform(std::uint64_t seed, VertexId v, std::size_t k) {
  const std::uint64_t h = graph::mix64(graph::mix64(graph::mix64(seed) ^ v) ^ k);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void require_finite(std::span<const double> values, const bn::GroundVariable& var,
                    std::size_t instance) {
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::NonFiniteMessage, "non-finite update of '" + var.display_name() +
                                                   "' instance " + std::to_string(instance));
    }
  }
}

}  // namespace

Engine::Engine(bn::GroundNetwork net, EngineOptions options)
    : net_(net.laid_out ? std::move(net) : bn::assign_vertex_ids(std::move(net))),
      options_(options) {
  graph_ = graph::build_graph(net_);
  assignment_ = graph::partition(net_, graph_, options_.strategy, options_.partitions, options_.seed);
  schedule_ = derive_schedule(net_);
  workers_ = options_.workers != 0
                 ? options_.workers
                 : std::max<std::size_t>(1, std::thread::hardware_concurrency());

  const std::size_t n = net_.vars.size();
  vertex_var_.resize(net_.total_vertices);
  state_.resize(n);
  exp_log_.resize(n);
  weights_.resize(n);
  to_selector_.resize(n);
  parents_.resize(n);
  selectors_.resize(n);
  child_offsets_.resize(n);
  children_.resize(n);
  for (const auto& v : net_.vars) {
    std::fill(vertex_var_.begin() + static_cast<std::ptrdiff_t>(v.lo),
              vertex_var_.begin() + static_cast<std::ptrdiff_t>(v.hi), v.id);
    if (!v.observed) state_[v.id].assign(v.count * v.dim, 0.0);
    if (v.kind == bn::DistKind::Dirichlet) {
      exp_log_[v.id].assign(v.count * v.dim, 0.0);
      continue;
    }
    const std::size_t k_count = net_.candidates(v.id);
    parents_[v.id].resize(v.count * k_count);
    for (std::size_t i = 0; i < v.count; ++i) {
      for (std::size_t k = 0; k < k_count; ++k) {
        parents_[v.id][i * k_count + k] = net_.parent_instance(v.id, i, k);
      }
    }
    if (v.selector >= 0) {
      selectors_[v.id].resize(v.count);
      for (std::size_t i = 0; i < v.count; ++i) selectors_[v.id][i] = net_.selector_instance(v.id, i);
      if (v.observed) {
        weights_[v.id].assign(v.count * k_count, 0.0);
        to_selector_[v.id].assign(v.count * k_count, 0.0);
      }
    }
  }
  for (const auto& s : net_.vars) {
    if (s.kind != bn::DistKind::Categorical || s.observed) continue;
    auto& offsets = child_offsets_[s.id];
    offsets.assign(s.count + 1, 0);
    for (const auto& x : net_.vars) {
      if (x.observed && x.selector == s.id) {
        for (std::size_t j = 0; j < x.count; ++j) ++offsets[selectors_[x.id][j] + 1];
      }
    }
    for (std::size_t i = 0; i < s.count; ++i) offsets[i + 1] += offsets[i];
    auto& kids = children_[s.id];
    kids.resize(offsets.back());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& x : net_.vars) {
      if (x.observed && x.selector == s.id) {
        for (std::size_t j = 0; j < x.count; ++j) kids[cursor[selectors_[x.id][j]]++] = {x.id, j};
      }
    }
  }
  build_routes();
}

void Engine::build_routes() {
  const std::uint32_t m = assignment_.partitions;
  routes_.assign(schedule_.substeps.size(), Route{});
  for (std::size_t s = 0; s < schedule_.substeps.size(); ++s) {
    const Substep& step = schedule_.substeps[s];
    if (step.kind != Substep::Kind::Update) continue;
    Route& r = routes_[s];
    std::vector<bool> member(net_.vars.size(), false);
    for (int v : step.vars) member[v] = true;
    r.groups.resize(m);
    r.edges.resize(m);
    std::size_t cursor = 0;
    for (std::size_t e = 0; e < graph_.edges.size(); ++e) {
      const Edge& edge = graph_.edges[e];
      if (edge.type == EdgeType::SelectorToChild) continue;
      const int dv = vertex_var_[edge.dst];
      if (!member[dv]) continue;
      const std::uint32_t p = assignment_.edge_to_part[e];
      auto& groups = r.groups[p];
      if (groups.empty() || groups.back().dst != edge.dst) {
        const std::size_t at = r.edges[p].size();
        groups.push_back({edge.dst, at, at, cursor});
        cursor += net_.vars[dv].dim;
      }
      r.edges[p].push_back(e);
      groups.back().edge_end = r.edges[p].size();
    }
    r.buffer_size = cursor;

    for (int v : step.vars) {
      for (VertexId id = net_.vars[v].lo; id < net_.vars[v].hi; ++id) r.dsts.push_back(id);
    }
    std::sort(r.dsts.begin(), r.dsts.end());
    std::vector<std::vector<std::size_t>> per_dst(r.dsts.size());
    for (std::uint32_t p = 0; p < m; ++p) {
      for (const auto& g : r.groups[p]) {
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(r.dsts.begin(), r.dsts.end(), g.dst) - r.dsts.begin());
        per_dst[idx].push_back(g.partial);
      }
    }
    r.dst_offsets.assign(r.dsts.size() + 1, 0);
    for (std::size_t i = 0; i < per_dst.size(); ++i) {
      r.dst_offsets[i + 1] = r.dst_offsets[i] + per_dst[i].size();
      r.partials.insert(r.partials.end(), per_dst[i].begin(), per_dst[i].end());
    }
  }
}

void Engine::parallel_for(std::size_t n,
                          const std::function<void(std::size_t, std::size_t)>& fn) const {
  const std::size_t threads = std::min(workers_, n);
  if (threads <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = n * t / threads;
    const std::size_t end = n * (t + 1) / threads;
    pool.emplace_back([&, t, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void Engine::update_expected_log(int var, std::size_t i) {
  const std::size_t dim = net_.vars[var].dim;
  expfam::expected_log(std::span<const double>(state_[var]).subspan(i * dim, dim),
                       std::span<double>(exp_log_[var]).subspan(i * dim, dim));
}

double Engine::selector_weight(int var, std::size_t i, std::size_t k) const {
  const bn::GroundVariable& v = net_.vars[var];
  if (v.selector < 0) return 1.0;
  const std::size_t k_count = net_.vars[v.selector].dim;
  if (v.observed) return weights_[var][i * k_count + k];
  const bn::GroundVariable& s = net_.vars[v.selector];
  const std::size_t si = selectors_[var][i];
  if (s.observed) return static_cast<std::size_t>(s.values[si]) == k ? 1.0 : 0.0;
  return state_[s.id][si * k_count + k];
}

void Engine::refresh_instance(int var, std::size_t i) {
  const bn::GroundVariable& x = net_.vars[var];
  const bn::GroundVariable& s = net_.vars[x.selector];
  const bn::GroundVariable& d = net_.vars[x.prob_parent];
  const std::size_t k_count = s.dim;
  const std::size_t si = selectors_[var][i];
  const auto value = static_cast<std::size_t>(x.values[i]);
  for (std::size_t k = 0; k < k_count; ++k) {
    weights_[var][i * k_count + k] =
        s.observed ? (static_cast<std::size_t>(s.values[si]) == k ? 1.0 : 0.0)
                   : state_[s.id][si * k_count + k];
    to_selector_[var][i * k_count + k] = exp_log_[d.id][parents_[var][i * k_count + k] * d.dim + value];
  }
}

void Engine::refresh(int var) {
  const std::size_t count = net_.vars[var].count;
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) refresh_instance(var, i);
  });
}

void Engine::add_message(const Edge& e, std::span<double> acc) const {
  switch (e.type) {
    case EdgeType::ChildToProb: {
      const int cv = vertex_var_[e.src];
      const std::size_t i = e.src - net_.vars[cv].lo;
      const double w = selector_weight(cv, i, e.slot);
      if (w == 0.0) return;
      const bn::GroundVariable& c = net_.vars[cv];
      if (c.observed) {
        acc[static_cast<std::size_t>(c.values[i])] += w;
      } else {
        const double* q = state_[cv].data() + i * c.dim;
        for (std::size_t v = 0; v < c.dim; ++v) acc[v] += w * q[v];
      }
      return;
    }
    case EdgeType::ProbToChild: {
      const int cv = vertex_var_[e.dst];
      const std::size_t i = e.dst - net_.vars[cv].lo;
      const double w = selector_weight(cv, i, e.slot);
      if (w == 0.0) return;
      const int dv = vertex_var_[e.src];
      const std::size_t dim = net_.vars[dv].dim;
      const double* el = exp_log_[dv].data() + (e.src - net_.vars[dv].lo) * dim;
      for (std::size_t v = 0; v < dim; ++v) acc[v] += w * el[v];
      return;
    }
    case EdgeType::ChildToSelector: {
      const int cv = vertex_var_[e.src];
      const bn::GroundVariable& c = net_.vars[cv];
      const std::size_t i = e.src - c.lo;
      const std::size_t k_count = acc.size();
      if (c.observed) {
        const double* m = to_selector_[cv].data() + i * k_count;
        for (std::size_t k = 0; k < k_count; ++k) acc[k] += m[k];
        return;
      }
      const bn::GroundVariable& d = net_.vars[c.prob_parent];
      const double* q = state_[cv].data() + i * c.dim;
      for (std::size_t k = 0; k < k_count; ++k) {
        const double* el = exp_log_[d.id].data() + parents_[cv][i * k_count + k] * d.dim;
        double sum = 0.0;
        for (std::size_t v = 0; v < c.dim; ++v) sum += q[v] * el[v];
        acc[k] += sum;
      }
      return;
    }
    case EdgeType::SelectorToChild: return;
  }
}

void Engine::apply_update(VertexId id, std::span<const double> incoming) {
  const int var = vertex_var_[id];
  const bn::GroundVariable& v = net_.vars[var];
  const std::size_t i = id - v.lo;
  std::span<double> row = std::span<double>(state_[var]).subspan(i * v.dim, v.dim);
  require_finite(incoming, v, i);
  if (v.kind == bn::DistKind::Dirichlet) {
    for (std::size_t k = 0; k < v.dim; ++k) row[k] = v.prior[k] + incoming[k];
    update_expected_log(var, i);
  } else {
    expfam::update_categorical(incoming, row);
  }
}

void Engine::init() {
  for (const auto& v : net_.vars) {
    if (v.observed) continue;
    if (v.kind == bn::DistKind::Dirichlet) {
      for (std::size_t i = 0; i < v.count; ++i) {
        std::copy(v.prior.begin(), v.prior.end(), state_[v.id].begin() + static_cast<std::ptrdiff_t>(i * v.dim));
        update_expected_log(v.id, i);
      }
      continue;
    }
    std::vector<double> logw(v.dim, 0.0);
    for (std::size_t i = 0; i < v.count; ++i) {
      for (std::size_t k = 0; k < v.dim; ++k) {
        logw[k] = options_.zero_noise ? 0.0 : -0.01 + 0.02 * noise_uniform(options_.seed, v.lo + i, k);
      }
      expfam::update_categorical(logw, std::span<double>(state_[v.id]).subspan(i * v.dim, v.dim));
    }
  }
  for (const auto& v : net_.vars) {
    if (v.observed && v.selector >= 0) refresh(v.id);
  }
}

void Engine::run_substep(const Substep& step) {
  if (step.kind == Substep::Kind::Refresh) {
    for (int v : step.vars) refresh(v);
    return;
  }
  auto it = std::find_if(schedule_.substeps.begin(), schedule_.substeps.end(),
                         [&](const Substep& s) { return s.kind == step.kind && s.vars == step.vars; });
  if (it == schedule_.substeps.end()) {
    throw Error(ErrorCode::InvalidArgument, "substep is not part of the schedule");
  }
  const Route& r = routes_[static_cast<std::size_t>(it - schedule_.substeps.begin())];
  buffer_.assign(r.buffer_size, 0.0);

  parallel_for(r.groups.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      for (const auto& g : r.groups[p]) {
        const std::size_t dim = net_.vars[vertex_var_[g.dst]].dim;
        std::span<double> acc(buffer_.data() + g.partial, dim);
        for (std::size_t e = g.edge_begin; e < g.edge_end; ++e) add_message(graph_.edges[r.edges[p][e]], acc);
      }
    }
  });

  parallel_for(r.dsts.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> incoming;
    for (std::size_t d = begin; d < end; ++d) {
      const VertexId id = r.dsts[d];
      const std::size_t dim = net_.vars[vertex_var_[id]].dim;
      incoming.assign(dim, 0.0);
      for (std::size_t j = r.dst_offsets[d]; j < r.dst_offsets[d + 1]; ++j) {
        const double* partial = buffer_.data() + r.partials[j];
        for (std::size_t k = 0; k < dim; ++k) incoming[k] += partial[k];
      }
      apply_update(id, incoming);
    }
  });
}

void Engine::run_iteration() {
  for (const auto& step : schedule_.substeps) run_substep(step);
}

double Engine::compute_elbo() const {
  std::vector<std::vector<double>> elog(net_.vars.size());
  for (const auto& v : net_.vars) {
    if (v.kind != bn::DistKind::Dirichlet) continue;
    elog[v.id].resize(v.count * v.dim);
    for (std::size_t i = 0; i < v.count; ++i) {
      expfam::expected_log(std::span<const double>(state_[v.id]).subspan(i * v.dim, v.dim),
                           std::span<double>(elog[v.id]).subspan(i * v.dim, v.dim));
    }
  }
  std::vector<int> order(net_.vars.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return net_.vars[a].lo < net_.vars[b].lo; });

  auto live_weight = [&](const bn::GroundVariable& c, std::size_t i, std::size_t k) {
    if (c.selector < 0) return 1.0;
    const bn::GroundVariable& s = net_.vars[c.selector];
    const std::size_t si = selectors_[c.id][i];
    if (s.observed) return static_cast<std::size_t>(s.values[si]) == k ? 1.0 : 0.0;
    return state_[s.id][si * s.dim + k];
  };

  double total = 0.0;
  std::vector<double> parent;
  std::vector<double> lik;
  for (int id : order) {
    const bn::GroundVariable& v = net_.vars[id];
    if (v.kind == bn::DistKind::Dirichlet) {
      for (std::size_t i = 0; i < v.count; ++i) {
        total += expfam::elbo_dirichlet_term(
            v.prior, std::span<const double>(state_[id]).subspan(i * v.dim, v.dim));
      }
      continue;
    }
    const bn::GroundVariable& d = net_.vars[v.prob_parent];
    const std::size_t k_count = net_.candidates(id);
    if (v.observed) {
      if (v.selector >= 0 && !net_.vars[v.selector].observed) continue;
      for (std::size_t i = 0; i < v.count; ++i) {
        for (std::size_t k = 0; k < k_count; ++k) {
          const double w = live_weight(v, i, k);
          if (w == 0.0) continue;
          total += w * elog[d.id][parents_[id][i * k_count + k] * d.dim +
                                  static_cast<std::size_t>(v.values[i])];
        }
      }
      continue;
    }
    parent.assign(v.dim, 0.0);
    lik.assign(v.dim, 0.0);
    for (std::size_t i = 0; i < v.count; ++i) {
      std::fill(parent.begin(), parent.end(), 0.0);
      std::fill(lik.begin(), lik.end(), 0.0);
      for (std::size_t k = 0; k < k_count; ++k) {
        const double w = live_weight(v, i, k);
        if (w == 0.0) continue;
        const double* el = elog[d.id].data() + parents_[id][i * k_count + k] * d.dim;
        for (std::size_t c = 0; c < v.dim; ++c) parent[c] += w * el[c];
      }
      for (std::size_t j = child_offsets_[id][i]; j < child_offsets_[id][i + 1]; ++j) {
        const auto [xv, xi] = children_[id][j];
        const bn::GroundVariable& x = net_.vars[xv];
        const bn::GroundVariable& xd = net_.vars[x.prob_parent];
        const auto value = static_cast<std::size_t>(x.values[xi]);
        for (std::size_t k = 0; k < v.dim; ++k) {
          lik[k] += elog[xd.id][parents_[xv][xi * v.dim + k] * xd.dim + value];
        }
      }
      total += expfam::elbo_categorical_terms(
          std::span<const double>(state_[id]).subspan(i * v.dim, v.dim), parent, lik);
    }
  }
  if (!std::isfinite(total)) throw Error(ErrorCode::NonFiniteMessage, "ELBO is not finite");
  return total;
}

std::span<const double> Engine::state(int var, std::size_t instance) const {
  const bn::GroundVariable& v = net_.vars[var];
  if (v.observed) {
    throw Error(ErrorCode::ObservedVariable, "'" + v.display_name() + "' is observed");
  }
  return std::span<const double>(state_[var]).subspan(instance * v.dim, v.dim);
}

void Engine::set_state(int var, std::size_t instance, std::span<const double> values) {
  const bn::GroundVariable& v = net_.vars[var];
  if (v.observed) {
    throw Error(ErrorCode::ObservedVariable, "'" + v.display_name() + "' is observed");
  }
  if (values.size() != v.dim) throw Error(ErrorCode::DimensionMismatch, "state dimension mismatch");
  std::copy(values.begin(), values.end(), state_[var].begin() + static_cast<std::ptrdiff_t>(instance * v.dim));
  if (v.kind == bn::DistKind::Dirichlet) update_expected_log(var, instance);
  for (const auto& x : net_.vars) {
    if (x.observed && x.selector >= 0) refresh(x.id);
  }
}

PosteriorSet Engine::posteriors() const {
  PosteriorSet out;
  out.seed = options_.seed;
  for (const auto& v : net_.vars) {
    VariablePosterior p;
    p.name = v.name;
    p.internal_name = v.internal_name;
    p.kind = v.kind;
    p.observed = v.observed;
    p.dim = v.dim;
    if (!v.observed) {
      p.params.reserve(v.count);
      for (std::size_t i = 0; i < v.count; ++i) {
        const auto row = std::span<const double>(state_[v.id]).subspan(i * v.dim, v.dim);
        p.params.emplace_back(row.begin(), row.end());
      }
    }
    out.variables.push_back(std::move(p));
  }
  return out;
}

Snapshot Engine::snapshot(std::size_t iteration,
                          std::vector<std::pair<std::size_t, double>> elbo_trace) const {
  Snapshot s;
  s.iteration = iteration;
  s.seed = options_.seed;
  s.elbo_trace = std::move(elbo_trace);
  for (const auto& v : net_.vars) {
    if (!v.observed) s.variables.emplace_back(v.internal_name, state_[v.id]);
  }
  return s;
}

void Engine::restore(const Snapshot& snap) {
  for (const auto& v : net_.vars) {
    if (v.observed) continue;
    auto it = std::find_if(snap.variables.begin(), snap.variables.end(),
                           [&](const auto& e) { return e.first == v.internal_name; });
    if (it == snap.variables.end() || it->second.size() != state_[v.id].size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "snapshot does not match the model at variable '" + v.display_name() + "'");
    }
  }
  for (const auto& v : net_.vars) {
    if (v.observed) continue;
    auto it = std::find_if(snap.variables.begin(), snap.variables.end(),
                           [&](const auto& e) { return e.first == v.internal_name; });
    state_[v.id] = it->second;
    if (v.kind == bn::DistKind::Dirichlet) {
      for (std::size_t i = 0; i < v.count; ++i) update_expected_log(v.id, i);
    }
  }
  for (const auto& v : net_.vars) {
    if (v.observed && v.selector >= 0) refresh(v.id);
  }
}

// ---------------------------------------------------------------- inference

Callback relative_elbo_stop(double threshold) {
  auto last = std::make_shared<std::optional<double>>();
  return [last, threshold](std::size_t, double elbo) {
    if (last->has_value()) {
      const double prev = **last;
      const double delta = std::abs(elbo - prev);
      if (delta == 0.0 || delta < threshold * std::abs(prev)) return false;
    }
    *last = elbo;
    return true;
  };
}

PosteriorSet infer(const bn::GroundNetwork& net, const InferOptions& options,
                   const Callback& callback) {
  Engine engine(net, options.engine);
  std::vector<std::pair<std::size_t, double>> trace;
  std::size_t iteration = 0;
  bool keep_going = true;
  if (options.resume) {
    engine.restore(*options.resume);
    trace = options.resume->elbo_trace;
    iteration = options.resume->iteration;
    for (const auto& [it, elbo] : trace) {
      if (callback && keep_going) keep_going = callback(it, elbo);
    }
  } else {
    engine.init();
    const double elbo = engine.compute_elbo();
    trace.emplace_back(0, elbo);
    if (callback) keep_going = callback(0, elbo);
  }
  while (keep_going && iteration < options.max_iterations) {
    ++iteration;
    double elbo = 0.0;
    try {
      engine.run_iteration();
      elbo = engine.compute_elbo();
    } catch (const Error& e) {
      throw Error(e.code(), "iteration " + std::to_string(iteration) + ": " + e.what());
    }
    trace.emplace_back(iteration, elbo);
    if (options.snapshot_every != 0 && iteration % options.snapshot_every == 0 &&
        !options.snapshot_path.empty()) {
      engine.snapshot(iteration, trace).save(options.snapshot_path);
    }
    if (callback) keep_going = callback(iteration, elbo);
  }
  PosteriorSet out = engine.posteriors();
  out.elbo_trace = std::move(trace);
  out.iterations_run = iteration;
  return out;
}

}  // namespace vmpforge::vmp
