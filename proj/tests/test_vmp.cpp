#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "support.hpp"
#include "vmpforge/expfam/expfamily.hpp"
#include "vmpforge/oracle/oracle.hpp"
#include "vmpforge/vmp/engine.hpp"
#include "vmpforge/vmp/schedule.hpp"

namespace vmpforge::vmp {
namespace {

using namespace vmpforge::testing;

constexpr const char* kDeepModel =
    "model Deep(a: Double) {\n"
    "  val pi = Beta(a)\n"
    "  val rho = (0 until 2).map(_ => Dirichlet(a, 3))\n"
    "  val phi = (0 until 3).map(_ => Beta(a))\n"
    "  val z = ?.map(_ => Categorical(pi))\n"
    "  val w = z.map(z => Categorical(rho(z)))\n"
    "  val x = w.map(w => Categorical(phi(w)))\n"
    "}\n";

bn::GroundNetwork deep(const std::vector<std::int64_t>& x) {
  return bn::ground(bn::compile_model(kDeepModel), {{"a", 1.0}}, {{"x", bn::Observation::flat(x)}});
}

bn::GroundNetwork dcmlda(const std::vector<std::vector<std::int64_t>>& docs, std::size_t k, std::size_t v) {
  return lda(docs, k, v, 0.5, 0.1, "dcmlda.ispk");
}

EngineOptions single_threaded(std::uint64_t seed = 0) {
  EngineOptions o;
  o.seed = seed;
  o.workers = 1;
  return o;
}

PosteriorSet run(const bn::GroundNetwork& net, std::size_t iterations, EngineOptions opts = single_threaded(),
                 const Callback& cb = {}) {
  InferOptions io;
  io.engine = opts;
  io.max_iterations = iterations;
  return infer(net, io, cb);
}

void expect_monotone(const PosteriorSet& ps) {
  for (std::size_t t = 1; t < ps.elbo_trace.size(); ++t) {
    const double prev = ps.elbo_trace[t - 1].second;
    const double cur = ps.elbo_trace[t].second;
    EXPECT_GE(cur, prev - 1e-8 * (1.0 + std::abs(prev))) << "iteration " << t;
  }
}

double max_abs_diff(const PosteriorSet& a, const PosteriorSet& b) {
  double worst = 0.0;
  for (std::size_t v = 0; v < a.variables.size(); ++v) {
    for (std::size_t i = 0; i < a.variables[v].params.size(); ++i) {
      for (std::size_t k = 0; k < a.variables[v].params[i].size(); ++k) {
        worst = std::max(worst, std::abs(a.variables[v].params[i][k] - b.variables[v].params[i][k]));
      }
    }
  }
  return worst;
}

// ----------------------------------------------------------------- schedule

TEST(Schedule, TwoCoins) {
  const auto net = two_coins({1, 0, 1});
  EXPECT_EQ(derive_schedule(net).describe(net), "[{pi, phi}, {x}, {z}, {x}]");
}

TEST(Schedule, Lda) {
  const auto net = lda({{0, 1}, {2}}, 2, 3);
  EXPECT_EQ(derive_schedule(net).describe(net), "[{phi, theta}, {x}, {z}, {x}]");
}

TEST(Schedule, SingleCoin) {
  const auto net = single_coin({1, 1, 0});
  EXPECT_EQ(derive_schedule(net).describe(net), "[{phi}]");
}

TEST(Schedule, DeepestSelectorLayerFirst) {
  const auto net = deep({0, 1, 1});
  EXPECT_EQ(derive_schedule(net).describe(net), "[{pi, rho, phi}, {x}, {w}, {x}, {z}, {x}]");
}

TEST(Schedule, NoTwoUpdatedVariablesExchangeMessages) {
  const std::vector<bn::GroundNetwork> nets = {two_coins({1, 0}), lda({{0, 1}, {2}}, 2, 3), deep({0, 1}),
                                               slda(synthetic_sentences(2, 2, 2, 4, 1), 2, 4),
                                               dcmlda({{0, 1}, {3}}, 2, 4)};
  for (const auto& net : nets) {
    const auto g = graph::build_graph(net);
    const auto s = derive_schedule(net);
    std::vector<bool> latent_seen(net.vars.size(), false);
    for (const auto& step : s.substeps) {
      if (step.kind != Substep::Kind::Update) continue;
      std::set<int> members(step.vars.begin(), step.vars.end());
      for (int v : step.vars) latent_seen[v] = true;
      for (const auto& e : g.edges) {
        const int a = net.variable_of(e.src);
        const int b = net.variable_of(e.dst);
        EXPECT_FALSE(members.count(a) && members.count(b)) << net.vars[a].name << " " << net.vars[b].name;
      }
    }
    for (const auto& v : net.vars) {
      if (!v.observed) EXPECT_TRUE(latent_seen[v.id]) << v.name;
    }
  }
}

// ------------------------------------------------------------------- engine

TEST(Engine, InitialisationIsSeededAndDeterministic) {
  const auto net = two_coins(random_flips(20, 0.7, 1));
  Engine a(net, single_threaded(5));
  Engine b(net, single_threaded(5));
  Engine c(net, single_threaded(6));
  a.init();
  b.init();
  c.init();
  const int z = net.find_var("z");
  bool any_difference = false;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto qa = a.state(z, i);
    const auto qb = b.state(z, i);
    const auto qc = c.state(z, i);
    EXPECT_EQ(std::vector<double>(qa.begin(), qa.end()), std::vector<double>(qb.begin(), qb.end()));
    if (qa[0] != qc[0]) any_difference = true;
    EXPECT_NEAR(qa[0], 0.5, 0.006);
    EXPECT_NEAR(qa[0] + qa[1], 1.0, 1e-15);
  }
  EXPECT_TRUE(any_difference);
  const auto pi = a.state(net.find_var("pi"), 0);
  EXPECT_EQ(std::vector<double>(pi.begin(), pi.end()), (std::vector<double>{1.0, 1.0}));
}

TEST(Engine, ZeroNoiseGivesExactlyUniform) {
  const auto net = lda({{0, 1, 2}}, 3, 3);
  EngineOptions o = single_threaded();
  o.zero_noise = true;
  Engine e(net, o);
  e.init();
  for (std::size_t i = 0; i < 3; ++i) {
    for (double q : e.state(net.find_var("z"), i)) EXPECT_EQ(q, 1.0 / 3.0);
  }
}

TEST(Engine, PiUpdateWithUniformResponsibilities) {
  const auto net = two_coins(random_flips(10, 0.5, 2), 2.0, 1.0);
  EngineOptions o = single_threaded();
  o.zero_noise = true;
  Engine e(net, o);
  e.init();
  e.run_substep(e.schedule().substeps[0]);
  const auto pi = e.state(net.find_var("pi"), 0);
  EXPECT_DOUBLE_EQ(pi[0], 7.0);
  EXPECT_DOUBLE_EQ(pi[1], 7.0);
}

TEST(Engine, SymmetricCoinsKeepResponsibilitiesUniform) {
  const auto net = two_coins(random_flips(10, 0.5, 3));
  EngineOptions o = single_threaded();
  o.zero_noise = true;
  Engine e(net, o);
  e.init();
  e.run_substep(e.schedule().substeps[2]);
  for (std::size_t i = 0; i < 10; ++i) {
    for (double q : e.state(net.find_var("z"), i)) EXPECT_EQ(q, 0.5);
  }
}

TEST(Engine, SingleCoinIsExactAfterOneIteration) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
    const auto x = random_flips(n, std::uniform_real_distribution<double>(0, 1)(rng), rng());
    const double a = std::uniform_real_distribution<double>(0.1, 5)(rng);
    const double b = std::uniform_real_distribution<double>(0.1, 5)(rng);
    auto net = single_coin(x);
    net.vars[net.find_var("phi")].prior = {b, a};
    std::uint64_t heads = 0;
    for (auto v : x) heads += static_cast<std::uint64_t>(v);
    const auto exact = oracle::coin_posterior(heads, n, a, b);
    const auto ps = run(net, 1);
    const auto& phi = get_result(ps, "phi")[0];
    EXPECT_NEAR(phi[1], exact.alpha[0], 1e-12);
    EXPECT_NEAR(phi[0], exact.alpha[1], 1e-12);
  }
}

TEST(Engine, SingleCoinElboIsTheLogEvidence) {
  const auto x = random_flips(40, 0.3, 8);
  const auto net = single_coin(x, 2.0);
  const auto ps = run(net, 2);
  double heads = 0;
  for (auto v : x) heads += static_cast<double>(v);
  const double tails = 40 - heads;
  const double evidence = expfam::log_multivariate_beta(std::vector<double>{2 + tails, 2 + heads}) -
                          expfam::log_multivariate_beta(std::vector<double>{2, 2});
  EXPECT_NEAR(ps.elbo_trace.back().second, evidence, 1e-10);
}

TEST(Engine, PriorOnlyElboIsZero) {
  Engine e(single_coin({}), single_threaded());
  e.init();
  EXPECT_EQ(e.compute_elbo(), 0.0);
}

TEST(Engine, TwoCoinsSingleObservationByHand) {
  EngineOptions o = single_threaded();
  o.zero_noise = true;
  Engine e(two_coins({1}), o);
  e.init();
  // q(z) uniform, Dirichlets at Beta(1,1): both expected logs are -1.
  EXPECT_NEAR(e.compute_elbo(), std::log(2.0) - 2.0, 1e-14);
  const int one[] = {1};
  EXPECT_NEAR(oracle::two_coin_evidence(one).log_evidence, -std::log(2.0), 1e-14);
  const auto ps = run(two_coins({1}), 30);
  EXPECT_LE(ps.elbo_trace.back().second, -std::log(2.0) + 1e-9);
}

TEST(Engine, ElboBelowExactEvidence) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const auto x = random_flips(n, 0.6, rng());
    std::vector<int> obs(x.begin(), x.end());
    const double exact = oracle::two_coin_evidence(obs).log_evidence;
    const auto ps = run(two_coins(x), 50, single_threaded(trial));
    for (const auto& [it, elbo] : ps.elbo_trace) EXPECT_LE(elbo, exact + 1e-9);
  }
}

TEST(Engine, CountConservation) {
  const auto x = random_flips(37, 0.7, 5);
  const auto net = two_coins(x, 1.5, 0.5);
  Engine e(net, single_threaded(9));
  e.init();
  for (int it = 0; it < 5; ++it) {
    e.run_iteration();
    double gained = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      for (double a : e.state(net.find_var("phi"), k)) gained += a - 0.5;
    }
    EXPECT_NEAR(gained, 37.0, 1e-9);
    double pi_gain = 0.0;
    for (double a : e.state(net.find_var("pi"), 0)) pi_gain += a - 1.5;
    EXPECT_NEAR(pi_gain, 37.0, 1e-9);
  }
}

struct MonotoneCase {
  const char* name;
  std::function<bn::GroundNetwork()> make;
};

class Monotone : public ::testing::TestWithParam<int> {};

TEST_P(Monotone, ElboNeverDecreases) {
  const std::vector<MonotoneCase> cases = {
      {"two coins", [] { return two_coins(random_flips(60, 0.8, 1)); }},
      {"lda", [] { return lda(synthetic_docs(8, 25, 3, 15, 2), 3, 15); }},
      {"slda", [] { return slda(synthetic_sentences(5, 4, 3, 12, 3), 3, 12); }},
      {"dcmlda", [] { return dcmlda(synthetic_docs(5, 20, 2, 8, 4), 2, 8); }},
      {"deep", [] { return deep({0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1}); }},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.name);
    expect_monotone(run(c.make(), 25, single_threaded(static_cast<std::uint64_t>(GetParam()))));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, Monotone, ::testing::Values(0, 1, 2));

TEST(Engine, PartitionCountDoesNotChangeResults) {
  const auto net = lda(synthetic_docs(10, 30, 3, 12, 6), 3, 12);
  const auto base = run(net, 10);
  for (std::uint32_t m : {2u, 4u, 8u}) {
    for (graph::Strategy s : {graph::Strategy::InferSparkRange, graph::Strategy::RandomVertexCut,
                              graph::Strategy::EdgePartition1D}) {
      EngineOptions o = single_threaded();
      o.partitions = m;
      o.strategy = s;
      EXPECT_LE(max_abs_diff(base, run(net, 10, o)), 1e-9) << m << " " << graph::to_string(s);
    }
  }
}

TEST(Engine, ParallelWorkersMatchSingleThreaded) {
  const auto net = lda(synthetic_docs(12, 30, 3, 12, 7), 3, 12);
  EngineOptions serial = single_threaded(3);
  serial.partitions = 4;
  EngineOptions parallel = serial;
  parallel.workers = 4;
  EXPECT_LE(max_abs_diff(run(net, 10, serial), run(net, 10, parallel)), 1e-9);
}

TEST(Engine, RepeatedRunsAreBitIdentical) {
  const auto net = lda(synthetic_docs(6, 20, 3, 9, 8), 3, 9);
  const auto a = run(net, 8);
  const auto b = run(net, 8);
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
  EXPECT_EQ(a.elbo_trace, b.elbo_trace);
}

TEST(Engine, NonFiniteStateIsReported) {
  const auto net = two_coins({1, 0, 1});
  Engine e(net, single_threaded());
  e.init();
  const double bad[] = {std::nan(""), std::nan("")};
  e.set_state(net.find_var("z"), 1, bad);
  try {
    e.run_iteration();
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NonFiniteMessage);
  }
}

TEST(Engine, StateOfObservedVariable) {
  Engine e(two_coins({1}), single_threaded());
  EXPECT_THROW(e.state(e.network().find_var("x"), 0), Error);
}

// ---------------------------------------------------------------- results

TEST(Results, TwoCoinsPhi) {
  const auto ps = run(two_coins({1, 0, 1, 1, 0, 1, 1, 1, 0, 1}), 20);
  const auto& phi = get_result(ps, "phi");
  ASSERT_EQ(phi.size(), 2u);
  EXPECT_EQ(phi[0].size(), 2u);
  EXPECT_EQ(get_result(ps, "pi").size(), 1u);
  EXPECT_EQ(get_result(ps, "z").size(), 10u);
}

TEST(Results, Errors) {
  const auto ps = run(two_coins({1}), 1);
  try {
    get_result(ps, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ObservedVariable);
  }
  try {
    get_result(ps, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownVariable);
  }
}

TEST(Results, LdaThetaPerDocument) {
  const auto ps = run(lda({{0, 1}, {2}, {1, 1, 1}}, 2, 3), 3);
  const auto& theta = get_result(ps, "theta");
  ASSERT_EQ(theta.size(), 3u);
  for (const auto& row : theta) EXPECT_EQ(row.size(), 2u);
}

// -------------------------------------------------------------- infer loop

TEST(Infer, ZeroIterations) {
  const auto ps = run(two_coins({1, 0}), 0);
  EXPECT_EQ(ps.iterations_run, 0u);
  ASSERT_EQ(ps.elbo_trace.size(), 1u);
  EXPECT_EQ(ps.elbo_trace[0].first, 0u);
}

TEST(Infer, CallbackSeesEveryIterationAndCanStop) {
  std::vector<std::size_t> seen;
  const auto ps = run(two_coins(random_flips(30, 0.6, 2)), 10, single_threaded(), [&](std::size_t it, double) {
    seen.push_back(it);
    return it < 4;
  });
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(ps.iterations_run, 4u);
  EXPECT_EQ(ps.elbo_trace.size(), 5u);
}

TEST(Infer, RelativeStopOnSingleCoin) {
  const auto ps = run(single_coin(random_flips(100, 0.4, 3)), 100, single_threaded(), relative_elbo_stop(0.001));
  EXPECT_LE(ps.iterations_run, 3u);
}

TEST(Infer, RelativeStopOnTwoCoins) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ps =
        run(two_coins(random_flips(50, 0.7, seed)), 500, single_threaded(seed), relative_elbo_stop(0.001));
    EXPECT_LE(ps.iterations_run, 50u);
  }
}

TEST(Infer, RelativeStopRule) {
  auto stop = relative_elbo_stop(0.001);
  EXPECT_TRUE(stop(0, -100.0));
  EXPECT_TRUE(stop(1, -50.0));
  EXPECT_FALSE(stop(2, -49.99));
  auto flat = relative_elbo_stop(0.001);
  EXPECT_TRUE(flat(0, 0.0));
  EXPECT_FALSE(flat(1, 0.0));
}

// ---------------------------------------------------------------- snapshots

TEST(Snapshot, JsonRoundTripIsExact) {
  Engine e(lda(synthetic_docs(3, 10, 2, 6, 1), 2, 6), single_threaded(77));
  e.init();
  e.run_iteration();
  const Snapshot s = e.snapshot(1, {{0, -12.345678901234567}, {1, -1.0 / 3.0}});
  const Snapshot back = Snapshot::from_json(s.to_json());
  EXPECT_EQ(back.iteration, 1u);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.elbo_trace, s.elbo_trace);
  std::map<std::string, std::vector<double>> a(s.variables.begin(), s.variables.end());
  std::map<std::string, std::vector<double>> b(back.variables.begin(), back.variables.end());
  EXPECT_EQ(a, b);
}

TEST(Snapshot, MalformedInput) {
  EXPECT_THROW(Snapshot::from_json("{"), Error);
  EXPECT_THROW(Snapshot::from_json(R"({"schemaVersion": 2})"), Error);
}

TEST(Snapshot, ResumeMatchesUninterruptedRun) {
  const auto net = two_coins(random_flips(25, 0.7, 4));
  const std::string path = (std::filesystem::temp_directory_path() / "vmpforge_resume_test.json").string();
  const auto straight = run(net, 10, single_threaded(2));

  InferOptions first;
  first.engine = single_threaded(2);
  first.max_iterations = 5;
  first.snapshot_every = 5;
  first.snapshot_path = path;
  infer(net, first);

  InferOptions second;
  second.engine = single_threaded(2);
  second.max_iterations = 10;
  second.resume = Snapshot::load(path);
  EXPECT_EQ(second.resume->iteration, 5u);
  std::vector<std::size_t> replayed;
  const auto resumed = infer(net, second, [&](std::size_t it, double) {
    replayed.push_back(it);
    return true;
  });
  std::filesystem::remove(path);

  EXPECT_EQ(max_abs_diff(straight, resumed), 0.0);
  EXPECT_EQ(straight.elbo_trace, resumed.elbo_trace);
  EXPECT_EQ(resumed.iterations_run, 10u);
  EXPECT_EQ(replayed.size(), 11u);
}

TEST(Snapshot, RestoreRejectsAnotherModel) {
  Engine a(two_coins({1, 0}), single_threaded());
  a.init();
  Engine b(two_coins({1, 0, 1}), single_threaded());
  EXPECT_THROW(b.restore(a.snapshot(0, {})), Error);
}

}  // namespace
}  // namespace vmpforge::vmp
