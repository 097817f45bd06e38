#include <gtest/gtest.h>

#include "random_models.hpp"
#include "safetk/analysis/mcs.hpp"
#include "test_util.hpp"

using namespace safetk;
using namespace safetk::analysis;
using sts::parse_expr;

namespace {

using Sets = std::vector<CutSet>;

AnalysisOptions opts(std::size_t card = 64, std::optional<std::size_t> bound = std::nullopt) {
  AnalysisOptions o;
  o.max_card = card;
  o.step_bound = bound;
  return o;
}

void expect_replayable(const fault::ExtendedModel& xm, const sts::Trace& t, const std::string& tle) {
  sts::TypedModel m(xm.model);
  ASSERT_FALSE(t.empty());
  EXPECT_TRUE(m.is_initial(t.front()));
  for (std::size_t i = 0; i + 1 < t.size(); ++i) EXPECT_TRUE(m.is_transition(t[i], t[i + 1]));
  EXPECT_TRUE(m.holds(m.compile_state_predicate(parse_expr(tle)), t.back()));
}

}  // namespace

TEST(Minimize, DropsSupersetsAndOrders) {
  Sets in = {{"b", "a"}, {"c"}, {"a", "b", "c"}, {"a", "b"}, {"d", "a"}};
  Sets want = {{"c"}, {"a", "b"}, {"a", "d"}};
  EXPECT_EQ(minimize(in), want);
}

TEST(Mcs, RedundantPair) {
  auto ext = load_fixture("redundant_pair");
  Sets want = {{"fc"}, {"fa", "fb"}};
  auto r = compute_mcs(ext.xm, parse_expr("!out"), opts());
  EXPECT_EQ(r.mcs, want);
  EXPECT_TRUE(r.complete);
  EXPECT_FALSE(r.nominal_reachable);
  EXPECT_EQ(brute_force_mcs(ext.xm, parse_expr("!out"), opts()).mcs, want);
  for (const CutSet& c : r.mcs) {
    auto w = witness(ext.xm, parse_expr("!out"), c, opts());
    ASSERT_TRUE(w);
    expect_replayable(ext.xm, *w, "!out");
  }
}

TEST(Mcs, FalseTle) {
  auto ext = load_fixture("redundant_pair");
  auto r = compute_mcs(ext.xm, parse_expr("FALSE"), opts());
  EXPECT_TRUE(r.mcs.empty());
  EXPECT_TRUE(r.complete);
}

TEST(Mcs, NominallyReachable) {
  auto ext = load_fixture("redundant_pair");
  auto r = compute_mcs(ext.xm, parse_expr("out"), opts());
  EXPECT_TRUE(r.nominal_reachable);
  EXPECT_EQ(r.mcs, Sets{CutSet{}});
  EXPECT_EQ(brute_force_mcs(ext.xm, parse_expr("out"), opts()).mcs, Sets{CutSet{}});
}

TEST(Mcs, NoEvents) {
  ExtensionInputs in;
  in.model = read_file(fixture("redundant_pair.smx"));
  auto ext = build_extension(in);
  EXPECT_TRUE(compute_mcs(ext.xm, parse_expr("!out"), opts()).mcs.empty());
  EXPECT_TRUE(brute_force_mcs(ext.xm, parse_expr("!out"), opts()).mcs.empty());
}

TEST(Mcs, CardinalityBoundIsReported) {
  auto ext = load_fixture("redundant_pair");
  auto r = compute_mcs(ext.xm, parse_expr("!out"), opts(1));
  EXPECT_EQ(r.mcs, Sets{{"fc"}});
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(brute_force_mcs(ext.xm, parse_expr("!out"), opts(1)).mcs, Sets{{"fc"}});
}

TEST(Mcs, StepBound) {
  auto ext = load_fixture("latch");
  // Trip needs x lost, then armed, then y lost: three steps at the earliest.
  for (std::size_t k = 0; k <= 5; ++k) {
    auto r = compute_mcs(ext.xm, parse_expr("trip"), opts(64, k));
    auto b = brute_force_mcs(ext.xm, parse_expr("trip"), opts(64, k));
    EXPECT_EQ(r.mcs, b.mcs) << "bound " << k;
    EXPECT_EQ(r.mcs.empty(), k < 3) << "bound " << k;
  }
  EXPECT_FALSE(compute_mcs(ext.xm, parse_expr("trip"), opts(64, 2)).complete);
}

TEST(CutSequences, Latch) {
  auto ext = load_fixture("latch");
  auto r = compute_mcs(ext.xm, parse_expr("trip"), opts());
  ASSERT_EQ(r.mcs, (Sets{{"fa", "fb"}}));
  auto seqs = compute_cut_sequences(ext.xm, parse_expr("trip"), r, opts());
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].orders, (std::vector<Order>{{"fa", "fb"}}));
  auto w = order_witness(ext.xm, parse_expr("trip"), {"fa", "fb"}, opts());
  ASSERT_TRUE(w);
  expect_replayable(ext.xm, *w, "trip");
  EXPECT_FALSE(order_witness(ext.xm, parse_expr("trip"), {"fb", "fa"}, opts()));
}

TEST(CutSequences, SymmetricAndSingleton) {
  auto ext = load_fixture("symmetric");
  auto r = compute_mcs(ext.xm, parse_expr("!out"), opts());
  auto seqs = compute_cut_sequences(ext.xm, parse_expr("!out"), r, opts());
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].orders, (std::vector<Order>{{"fa", "fb"}, {"fb", "fa"}}));

  auto rp = load_fixture("redundant_pair");
  auto r2 = compute_mcs(rp.xm, parse_expr("!out"), opts());
  auto s2 = compute_cut_sequences(rp.xm, parse_expr("!out"), r2, opts());
  ASSERT_EQ(s2.size(), 2u);
  EXPECT_EQ(s2[0].base, CutSet{"fc"});
  EXPECT_EQ(s2[0].orders, (std::vector<Order>{{"fc"}}));
}

TEST(Cca, SimultaneousAddsSingletonCause) {
  auto ext = load_fixture("symmetric", "cc_pair.cca");
  ASSERT_NE(ext.xm.find_event("burst"), nullptr);
  Sets want = {{"burst"}, {"fa", "fb"}};
  EXPECT_EQ(compute_mcs(ext.xm, parse_expr("!out"), opts()).mcs, want);
  EXPECT_EQ(brute_force_mcs(ext.xm, parse_expr("!out"), opts()).mcs, want);
  auto w = witness(ext.xm, parse_expr("!out"), {"burst"}, opts());
  ASSERT_TRUE(w);
  expect_replayable(ext.xm, *w, "!out");
}

TEST(Cca, ParseErrors) {
  EXPECT_TRUE(cca::parse_cca("").empty());
  auto specs = cca::parse_cca("cc c1: members {f1, f2}, pattern cascading {f2: [1,3]}, prob 1e-5;");
  ASSERT_EQ(specs.size(), 1u);
  EXPECT_TRUE(specs[0].cascading);
  EXPECT_EQ(specs[0].window("f2"), (cca::Window{1, 3}));
  EXPECT_EQ(specs[0].window("f1"), (cca::Window{0, 0}));
  EXPECT_DOUBLE_EQ(specs[0].probability, 1e-5);
  EXPECT_THROW(cca::parse_cca("cc c: members {f1, f2}, pattern cascading {f2: [3,1]}, prob 0.1;"), InputError);
  EXPECT_THROW(cca::parse_cca("cc c: members {f1, f2}, pattern simultaneous, prob 0.1;\n"
                              "cc c: members {f3, f4}, pattern simultaneous, prob 0.1;"),
               InputError);
}

TEST(Cca, ApplyErrors) {
  auto ext = load_fixture("symmetric");
  auto apply = [&](const char* text) { return cca::apply_cca(ext.xm, cca::parse_cca(text)); };
  EXPECT_THROW(apply("cc c: members {fa, nope}, pattern simultaneous, prob 0.1;"), InputError);
  EXPECT_THROW(apply("cc c: members {fa, fb}, pattern simultaneous, prob 0.1;\n"
                     "cc d: members {fb, fa}, pattern simultaneous, prob 0.1;"),
               InputError);
  EXPECT_THROW(apply("cc fa: members {fa, fb}, pattern simultaneous, prob 0.1;"), InputError);
  EXPECT_EQ(apply("").model, ext.xm.model);
}

TEST(Cca, CascadingWindowIsExact) {
  auto ext = load_fixture("symmetric");
  auto xm = cca::apply_cca(ext.xm, cca::parse_cca("cc k: members {fa, fb}, pattern cascading {fb: [1,1]}, prob 0.1;"));
  // With only the cause enabled, fb occurs exactly one step after it.
  sts::TypedModel m(restrict_model(xm, {"k"}));
  sts::StateGraph g(m);
  auto cc = *m.var_index("cc#k");
  auto clock = *m.var_index("cc#k.clock");
  auto fb = *m.var_index("mode#fb");
  for (std::uint32_t s = 0; s < g.size(); ++s) {
    sts::StateView v = g.state(s);
    bool on = v[cc] == 1;
    std::int64_t k = m.var(clock).values[v[clock]];
    EXPECT_EQ(v[fb] == 1, on && k >= 1) << m.format_state(v);
  }
}

TEST(Oracle, RandomModelsAgree) {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    RandomModel rm = make_random_model(seed, 2 + static_cast<int>(seed % 5));
    ExtensionInputs in{rm.smx, "", rm.fei, ""};
    auto ext = build_extension(in);
    auto o = opts(4);
    auto tle = parse_expr(rm.tle);
    EXPECT_EQ(compute_mcs(ext.xm, tle, o).mcs, brute_force_mcs(ext.xm, tle, o).mcs) << rm.smx << rm.tle;
  }
}
