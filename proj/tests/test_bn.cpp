#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"

namespace vmpforge::bn {
namespace {

using namespace vmpforge::testing;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

const std::vector<std::int64_t> kFlips = {1, 0, 1, 1, 0, 1, 1, 1, 0, 1};

TEST(Template, TwoCoinsTree) {
  EXPECT_EQ(compiled("two_coins.ispk").describe(), "TOPLEVEL{r1(pi), Plate1(2){r2(phi)}, Plate2(?){r3(z), r4(x)}}");
}

TEST(Template, LdaTree) {
  EXPECT_EQ(compiled("lda_compact.ispk").describe(),
            "TOPLEVEL{Plate1(K){r1(phi)}, Plate2(?){r2(theta), Plate3(?){r3(z), r4(x)}}}");
}

TEST(Template, SingleUnplatedVariable) {
  const PlateTree t = compile_model("model M(a: Double) { val p = Beta(a) }");
  EXPECT_EQ(t.describe(), "TOPLEVEL{r1(p)}");
  EXPECT_EQ(t.plates.size(), 1u);
}

TEST(Template, InternalNamesFollowBindingOrderNotIdentifiers) {
  const PlateTree t = compile_model("model M(a: Double) { val zz = Beta(a)\n val aa = ?.map(_ => Categorical(zz)) }");
  EXPECT_EQ(t.vars[0].internal_name, "r1");
  EXPECT_EQ(t.vars[0].name, "zz");
  EXPECT_EQ(t.vars[1].internal_name, "r2");
  EXPECT_EQ(t.find_var("r2"), 1);
  EXPECT_EQ(t.find_var("aa"), 1);
}

TEST(Template, DependenciesPrecedeInBindingOrder) {
  for (const char* file : {"two_coins.ispk", "lda.ispk", "slda.ispk", "dcmlda.ispk"}) {
    const PlateTree& t = compiled(file);
    for (const auto& v : t.vars) {
      EXPECT_LT(v.prob_parent, v.id) << file;
      EXPECT_LT(v.selector, v.id) << file;
    }
  }
}

TEST(Template, DotRendering) {
  const std::string dot = compiled("two_coins.ispk").to_dot();
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_NE(dot.find("cluster"), std::string::npos);
}

TEST(Bind, TwoCoinsPlateSizeFromObservation) {
  const GroundNetwork net = two_coins(kFlips);
  const auto& x = net.var("x");
  EXPECT_EQ(x.count, 10u);
  EXPECT_EQ(net.plates[x.plate].flat_size(), 10u);
  EXPECT_EQ(net.var("phi").count, 2u);
  EXPECT_EQ(net.var("pi").count, 1u);
  EXPECT_TRUE(x.observed);
  EXPECT_FALSE(net.var("z").observed);
  EXPECT_EQ(net.var("pi").prior, (std::vector<double>{1.0, 1.0}));
}

TEST(Bind, RaggedDocuments) {
  const GroundNetwork net = lda({{0, 1, 2}, {3, 4, 0, 1, 2}}, 2, 5);
  EXPECT_EQ(net.var("theta").count, 2u);
  const auto& x = net.var("x");
  EXPECT_EQ(x.count, 8u);
  const GroundPlate& inner = net.plates[x.plate];
  EXPECT_EQ(inner.offsets, (std::vector<std::size_t>{0, 3, 8}));
  EXPECT_EQ(inner.size_of(1), 5u);
  EXPECT_EQ(inner.owner(2), 0u);
  EXPECT_EQ(inner.owner(3), 1u);
  EXPECT_EQ(net.var("phi").dim, 5u);
}

TEST(Bind, UnresolvedPlate) {
  EXPECT_EQ(code_of([] { ground(compiled("two_coins.ispk"), {{"alpha", 1}, {"beta", 1}}, {}); }),
            ErrorCode::UnresolvedPlate);
}

TEST(Bind, ExplicitSizeWithoutObservation) {
  const GroundNetwork net = ground(compiled("two_coins.ispk"), {{"alpha", 1}, {"beta", 1}}, {}, {{"z", 4}});
  EXPECT_EQ(net.var("x").count, 4u);
  EXPECT_FALSE(net.var("x").observed);
}

TEST(Bind, MissingParam) {
  EXPECT_EQ(code_of([] { ground(compiled("two_coins.ispk"), {{"alpha", 1}}, {{"x", Observation::flat(kFlips)}}); }),
            ErrorCode::MissingParam);
}

TEST(Bind, ShapeMismatchAgainstExplicitSize) {
  EXPECT_EQ(code_of([] {
              ground(compiled("two_coins.ispk"), {{"alpha", 1}, {"beta", 1}}, {{"x", Observation::flat(kFlips)}},
                     {{"x", 5}});
            }),
            ErrorCode::ShapeMismatch);
}

TEST(Bind, ShapeMismatchAgainstBounds) {
  const PlateTree t = compile_model(
      "model M(a: Double) { val p = Beta(a)\n val x = (0 until 3).map(_ => Categorical(p)) }");
  EXPECT_EQ(code_of([&] { ground(t, {{"a", 1}}, {{"x", Observation::flat({0, 1})}}); }), ErrorCode::ShapeMismatch);
}

TEST(Bind, NestingDepthMustMatch) {
  EXPECT_EQ(lda({}, 2, 5).var("theta").count, 0u);
  EXPECT_EQ(code_of([] {
              ground(compiled("lda.ispk"), {{"K", 2}, {"V", 5}, {"alpha", 1}, {"beta", 1}},
                     {{"x", Observation::flat({0, 1})}});
            }),
            ErrorCode::ShapeMismatch);
}

TEST(Bind, CategoryOutOfRange) {
  EXPECT_EQ(code_of([] { two_coins({0, 1, 2}); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { two_coins({0, -1}); }), ErrorCode::DomainError);
}

TEST(Bind, UnknownNames) {
  EXPECT_EQ(code_of([] {
              ground(compiled("two_coins.ispk"), {{"alpha", 1}, {"beta", 1}}, {{"y", Observation::flat(kFlips)}});
            }),
            ErrorCode::UnknownVariable);
  EXPECT_EQ(code_of([] {
              ground(compiled("two_coins.ispk"), {{"alpha", 1}, {"beta", 1}, {"gamma", 1}},
                     {{"x", Observation::flat(kFlips)}});
            }),
            ErrorCode::InvalidArgument);
}

TEST(Bind, LongParameterMustBeIntegral) {
  EXPECT_EQ(code_of([] {
              ground(compiled("lda.ispk"), {{"K", 2.5}, {"V", 5}, {"alpha", 1}, {"beta", 1}},
                     {{"x", Observation::nested({{0}})}});
            }),
            ErrorCode::DomainError);
}

TEST(Bind, NonPositiveConcentration) {
  EXPECT_EQ(code_of([] { two_coins(kFlips, 0.0); }), ErrorCode::DomainError);
}

TEST(Evaluate, LongDivisionTruncates) {
  const PlateTree t = compile_model(
      "model M(K: Long, a: Double) { val p = (0 until K / 2).map(_ => Dirichlet(a / 2, K)) }");
  const GroundNetwork net = ground(t, {{"K", 5}, {"a", 3}}, {});
  EXPECT_EQ(net.var("p").count, 2u);
  EXPECT_EQ(net.var("p").prior, (std::vector<double>(5, 1.5)));
}

TEST(Evaluate, InclusiveRange) {
  const PlateTree t = compile_model("model M(a: Double) { val p = (1 to 3).map(_ => Beta(a)) }");
  EXPECT_EQ(ground(t, {{"a", 1}}, {}).var("p").count, 3u);
}

TEST(Layout, TwoCoinsIntervals) {
  const GroundNetwork net = two_coins(kFlips);
  EXPECT_EQ(net.var("x").lo, 0u);
  EXPECT_EQ(net.var("x").hi, 10u);
  EXPECT_EQ(net.var("z").lo, 10u);
  EXPECT_EQ(net.var("z").hi, 20u);
  EXPECT_EQ(net.var("phi").lo, 20u);
  EXPECT_EQ(net.var("phi").hi, 22u);
  EXPECT_EQ(net.var("pi").lo, 22u);
  EXPECT_EQ(net.var("pi").hi, 23u);
  EXPECT_EQ(net.total_vertices, 23u);
}

TEST(Layout, Companion) {
  const GroundNetwork net = two_coins(kFlips);
  const int z = net.find_var("z");
  const int x = net.find_var("x");
  EXPECT_EQ(net.companion(7, z), 17u);
  for (VertexId id = 0; id < 10; ++id) EXPECT_EQ(net.companion(net.companion(id, z), x), id);
}

TEST(Layout, EmptyPlateGivesEmptyInterval) {
  const GroundNetwork net = two_coins({});
  const auto& x = net.var("x");
  EXPECT_EQ(x.count, 0u);
  EXPECT_EQ(x.lo, x.hi);
  EXPECT_EQ(net.var("phi").lo, 0u);
  EXPECT_EQ(net.total_vertices, 3u);
}

TEST(Layout, VariableLookupByBinarySearch) {
  const GroundNetwork net = two_coins(kFlips);
  EXPECT_EQ(net.variable_of(0), net.find_var("x"));
  EXPECT_EQ(net.variable_of(19), net.find_var("z"));
  EXPECT_EQ(net.variable_of(21), net.find_var("phi"));
  EXPECT_EQ(net.variable_of(22), net.find_var("pi"));
  EXPECT_EQ(net.instance_of(21), 1u);
}

TEST(Layout, ParentInstances) {
  const GroundNetwork net = lda({{0, 1, 2}, {3, 4}}, 3, 5);
  const int z = net.find_var("z");
  const int x = net.find_var("x");
  EXPECT_EQ(net.candidates(z), 1u);
  EXPECT_EQ(net.parent_instance(z, 2), 0u);
  EXPECT_EQ(net.parent_instance(z, 3), 1u);
  EXPECT_EQ(net.candidates(x), 3u);
  EXPECT_EQ(net.parent_instance(x, 4, 2), 2u);
  EXPECT_EQ(net.selector_instance(x, 4), 4u);
}

TEST(Layout, PerDocumentMixtureParents) {
  const GroundNetwork net = bn::ground(compiled("dcmlda.ispk"), {{"K", 2}, {"V", 4}, {"alpha", 1}, {"beta", 1}},
                                       {{"x", Observation::nested({{0, 1}, {2, 3, 0}})}});
  const int x = net.find_var("x");
  EXPECT_EQ(net.var("phi").count, 4u);
  EXPECT_EQ(net.parent_instance(x, 0, 1), 1u);
  EXPECT_EQ(net.parent_instance(x, 3, 0), 2u);
  EXPECT_EQ(net.parent_instance(x, 4, 1), 3u);
}

TEST(Layout, SentenceSelectors) {
  Observation obs;
  obs.levels = {{1}, {2}, {2, 3}};
  obs.values = {0, 1, 2, 3, 0};
  const GroundNetwork net = slda(obs, 2, 4);
  const int x = net.find_var("x");
  EXPECT_EQ(net.var("z").count, 2u);
  EXPECT_EQ(net.selector_instance(x, 1), 0u);
  EXPECT_EQ(net.selector_instance(x, 2), 1u);
}

class LayoutProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LayoutProperty, IntervalsPartitionTheIdSpace) {
  const auto docs = synthetic_docs(1 + GetParam() % 7, 3 + GetParam() % 11, 3, 9, GetParam());
  const GroundNetwork net = lda(docs, 3, 9);
  std::vector<int> owner(net.total_vertices, -1);
  for (const auto& v : net.vars) {
    EXPECT_EQ(v.hi - v.lo, v.count);
    for (VertexId id = v.lo; id < v.hi; ++id) {
      EXPECT_EQ(owner[id], -1);
      owner[id] = v.id;
      EXPECT_EQ(net.variable_of(id), v.id);
    }
  }
  for (int o : owner) EXPECT_NE(o, -1);

  std::size_t words = 0;
  for (const auto& d : docs) words += d.size();
  const auto& x = net.var("x");
  EXPECT_EQ(x.count, words);
  const GroundPlate& inner = net.plates[x.plate];
  for (std::size_t d = 0; d < docs.size(); ++d) EXPECT_EQ(inner.size_of(d), docs[d].size());
  const auto& z = net.var("z");
  const int x_id = net.find_var("x");
  for (VertexId id = z.lo; id < z.hi; ++id) EXPECT_EQ(net.companion(net.companion(id, x_id), z.id), id);
}

INSTANTIATE_TEST_SUITE_P(Seeds, LayoutProperty, ::testing::Range<std::uint64_t>(1, 21));

}  // namespace
}  // namespace vmpforge::bn
