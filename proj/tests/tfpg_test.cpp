#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "safetk/analysis/mcs.hpp"
#include "safetk/sts/explore.hpp"
#include "safetk/tfpg/tfpg.hpp"
#include "test_util.hpp"

using namespace safetk;
using namespace safetk::tfpg;

namespace {

Tfpg load_tfpg(const std::string& name) { return parse_tfpg(read_file(fixture(name))); }

NodeBinding battery_binding() { return parse_binding(read_file(fixture("battery_sensor.bind"))); }

ActivationTrace trace_of(std::map<std::string, std::size_t> act, std::size_t len, const std::string& mode) {
  return ActivationTrace{std::move(act), std::vector<std::string>(len, mode)};
}

// Reference semantics: enumerate one firing step (or none) per edge and
// recompute every discrepancy's activation from the firings.
bool brute_force_admits(const Tfpg& g, const ActivationTrace& at) {
  const std::size_t len = at.mode.size();
  constexpr std::size_t kNever = SIZE_MAX;
  std::vector<std::vector<std::size_t>> options;
  for (const Edge& e : g.edges) {
    std::vector<std::size_t> opts;
    auto src = at.activated.find(e.src);
    if (src == at.activated.end()) {
      options.push_back({kNever});
      continue;
    }
    bool forced = false;
    for (std::size_t t = src->second; t < len; ++t) {
      std::int64_t c = 0;
      for (std::size_t s = src->second; s < t; ++s) {
        if (!e.modes || std::count(e.modes->begin(), e.modes->end(), at.mode[s])) ++c;
      }
      bool en = !e.modes || std::count(e.modes->begin(), e.modes->end(), at.mode[t]);
      if (en && c >= e.tmin && (!e.tmax || c <= *e.tmax)) opts.push_back(t);
      if (en && e.tmax && c >= *e.tmax) forced = true;
    }
    if (!forced) opts.push_back(kNever);
    options.push_back(opts);
  }
  std::vector<std::size_t> pick(g.edges.size(), 0);
  for (;;) {
    bool ok = true;
    for (const auto& [id, kind] : g.nodes) {
      if (kind == NodeKind::failure) continue;
      std::size_t predicted = kNever;
      bool all = true, any = false;
      std::size_t latest = 0;
      for (std::size_t i = 0; i < g.edges.size(); ++i) {
        if (g.edges[i].dst != id) continue;
        any = true;
        std::size_t f = options[i][pick[i]];
        if (kind == NodeKind::or_node) {
          predicted = std::min(predicted, f);
        } else if (f == kNever) {
          all = false;
        } else {
          latest = std::max(latest, f);
        }
      }
      if (kind == NodeKind::and_node) predicted = (any && all) ? latest : kNever;
      auto act = at.activated.find(id);
      std::size_t actual = act == at.activated.end() ? kNever : act->second;
      if (predicted != actual) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < options[i].size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) return false;
  }
}

Tfpg random_graph(std::mt19937& rng) {
  Tfpg g;
  g.name = "r";
  g.modes = {"A", "B"};
  g.nodes = {{"f1", NodeKind::failure}, {"f2", NodeKind::failure}};
  std::vector<std::string> ds = {"d1", "d2", "d3"};
  for (const auto& d : ds) g.nodes[d] = rng() % 3 ? NodeKind::or_node : NodeKind::and_node;
  std::vector<std::string> all = {"f1", "f2", "d1", "d2", "d3"};
  for (const auto& dst : ds) {
    for (const auto& src : all) {
      if (src == dst || rng() % 3) continue;
      Edge e{src, dst, static_cast<std::int64_t>(rng() % 3), std::nullopt, std::nullopt};
      if (rng() % 4) e.tmax = e.tmin + static_cast<std::int64_t>(rng() % 3);
      if (rng() % 2) e.modes = std::vector<std::string>{rng() % 2 ? "A" : "B"};
      g.edges.push_back(e);
    }
  }
  g.normalize();
  return g;
}

ActivationTrace random_trace(std::mt19937& rng, const Tfpg& g, std::size_t len) {
  ActivationTrace at;
  for (std::size_t t = 0; t < len; ++t) at.mode.push_back(rng() % 3 ? "A" : "B");
  for (const auto& [id, k] : g.nodes) {
    if (rng() % 3) at.activated[id] = rng() % len;
  }
  return at;
}

}  // namespace

TEST(TfpgText, EdgeForms) {
  Tfpg g = parse_tfpg(
      "tfpg t; modes P, S1, S2; failure G1_Off; discrepancy G1_DEAD or; discrepancy B1_LOW or;\n"
      "edge G1_Off -> G1_DEAD [0,0] {*};\nedge G1_DEAD -> B1_LOW [0,100] {P,S1};\n");
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[1], (Edge{"G1_Off", "G1_DEAD", 0, 0, std::nullopt}));
  EXPECT_EQ(g.edges[0], (Edge{"G1_DEAD", "B1_LOW", 0, 100, std::vector<std::string>{"P", "S1"}}));
  Tfpg u = parse_tfpg("tfpg t; modes A; discrepancy x or; discrepancy y and; edge x -> y [3,inf] {A};");
  EXPECT_FALSE(u.edges[0].tmax);
  EXPECT_FALSE(u.edges[0].modes) << "a list naming every mode is stored as ALL";
}

TEST(TfpgText, BatteryFixtureShape) {
  Tfpg g = load_tfpg("battery_sensor.tfpg");
  std::map<NodeKind, int> kinds;
  for (const auto& [id, k] : g.nodes) ++kinds[k];
  EXPECT_EQ(g.nodes.size(), 13u);
  EXPECT_EQ(kinds[NodeKind::failure], 4);
  EXPECT_EQ(kinds[NodeKind::or_node], 8);
  EXPECT_EQ(kinds[NodeKind::and_node], 1);
  EXPECT_EQ(g.nodes.at("Sys_DEAD"), NodeKind::and_node);
  EXPECT_EQ(g.edges.size(), 14u);
}

TEST(TfpgText, RoundTrips) {
  for (const char* f : {"battery_sensor.tfpg", "battery_sensor_scaled.tfpg"}) {
    Tfpg g = load_tfpg(f);
    std::string text = write_tfpg(g);
    EXPECT_EQ(parse_tfpg(text), g);
    EXPECT_EQ(write_tfpg(parse_tfpg(text)), text);
    std::string xml = tfpg_to_xml(g);
    EXPECT_EQ(tfpg_from_xml(xml), g);
    EXPECT_EQ(tfpg_to_xml(tfpg_from_xml(xml)), xml);
    EXPECT_EQ(write_tfpg(tfpg_from_xml(xml)), text);
  }
}

TEST(TfpgText, Errors) {
  const std::string head = "tfpg t; modes P; failure f; discrepancy d or; discrepancy e and;\n";
  EXPECT_THROW(parse_tfpg(head + "edge d -> f [0,1] {*};"), InputError);
  EXPECT_THROW(parse_tfpg(head + "edge f -> d [2,1] {*};"), InputError);
  EXPECT_THROW(parse_tfpg(head + "edge f -> d [0,1] {Q};"), InputError);
  EXPECT_THROW(parse_tfpg(head + "edge d -> d [0,1] {*};"), InputError);
  EXPECT_THROW(parse_tfpg(head + "edge f -> d [0,1] {*}; edge f -> d [0,2] {*};"), InputError);
  EXPECT_THROW(parse_tfpg(head + "edge f -> x [0,1] {*};"), InputError);
  EXPECT_THROW(parse_tfpg(head + "edge f -> d [0,1];"), InputError);
  EXPECT_THROW(parse_tfpg(head + "discrepancy d or;"), InputError);
  EXPECT_THROW(tfpg_from_xml("<tfpg name=\"t\"><node id=\"a\" kind=\"xor\"/></tfpg>"), InputError);
  EXPECT_THROW(tfpg_from_xml("<tfpg name=\"t\"><node id=\"a\" kind=\"failure\"/><node id=\"b\" kind=\"or\"/>"
                             "<edge src=\"b\" dst=\"a\" tmin=\"0\" tmax=\"1\" modes=\"*\"/></tfpg>"),
               InputError);
}

TEST(TfpgText, Dot) {
  std::string dot = tfpg_to_dot(load_tfpg("battery_sensor.tfpg"));
  EXPECT_NE(dot.find("\"G1_Off\" [shape=box, style=dashed]"), std::string::npos);
  EXPECT_NE(dot.find("\"Sys_DEAD\" [shape=box]"), std::string::npos);
  EXPECT_NE(dot.find("\"S1_NO\" [shape=circle]"), std::string::npos);
  EXPECT_NE(dot.find("\"B1_DEAD\" -> \"S2_NO\" [label=\"[0,1] {S1}\"]"), std::string::npos);
}

TEST(Admits, BatteryExamples) {
  Tfpg g = load_tfpg("battery_sensor.tfpg");
  std::map<std::string, std::size_t> act = {
      {"G1_Off", 0}, {"G1_DEAD", 0}, {"B1_LOW", 50}, {"B1_DEAD", 57}, {"S1_NO", 58}};
  auto at = trace_of(act, 59, "P");
  EXPECT_EQ(admits(g, at), std::nullopt);
  EXPECT_TRUE(brute_force_admits(g, at));

  act["B1_DEAD"] = 70;
  auto late = trace_of(act, 71, "P");
  auto no = admits(g, late);
  ASSERT_TRUE(no);
  EXPECT_EQ(no->node, "B1_DEAD");
  EXPECT_EQ(no->reason, Reason::too_late);
  EXPECT_EQ(no->step, 60u);

  EXPECT_EQ(admits(g, trace_of({}, 30, "P")), std::nullopt);
  EXPECT_EQ(admits(g, trace_of({}, 0, "P")), std::nullopt);
}

TEST(Admits, Reasons) {
  Tfpg g = load_tfpg("battery_sensor.tfpg");
  auto r = admits(g, trace_of({{"S1_NO", 3}}, 5, "P"));
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (Inconsistency{"S1_NO", 3, Reason::missing_cause}));

  r = admits(g, trace_of({{"G1_Off", 0}, {"G1_DEAD", 0}, {"B1_LOW", 3}, {"B1_DEAD", 4}}, 6, "P"));
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (Inconsistency{"B1_DEAD", 4, Reason::too_early}));

  r = admits(g, trace_of({{"G1_Off", 0}, {"G1_DEAD", 0}, {"B1_LOW", 3}}, 6, "S2"));
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (Inconsistency{"B1_LOW", 3, Reason::mode_violation}));

  r = admits(g, trace_of({{"S1_Off", 0}, {"S1_NO", 0}, {"Sys_DEAD", 0}}, 3, "P"));
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (Inconsistency{"Sys_DEAD", 0, Reason::and_incomplete}));

  r = admits(g, trace_of({{"G1_Off", 2}}, 4, "P"));
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (Inconsistency{"G1_DEAD", 2, Reason::too_late}));

  EXPECT_THROW(admits(g, trace_of({}, 2, "Q")), InputError);
  EXPECT_THROW(admits(g, trace_of({{"S1_NO", 5}}, 2, "P")), InputError);
}

TEST(Admits, MatchesDelayEnumeration) {
  std::mt19937 rng(7);
  int yes = 0;
  for (int i = 0; i < 3000; ++i) {
    Tfpg g = random_graph(rng);
    ActivationTrace at = random_trace(rng, g, 1 + rng() % 5);
    bool expected = brute_force_admits(g, at);
    EXPECT_EQ(!admits(g, at).has_value(), expected) << write_tfpg(g);
    yes += expected;
  }
  EXPECT_GT(yes, 150);
}

TEST(Admits, MonotoneInIntervalWidening) {
  std::mt19937 rng(11);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    Tfpg g = random_graph(rng);
    ActivationTrace at = random_trace(rng, g, 1 + rng() % 6);
    if (admits(g, at) || g.edges.empty()) continue;
    Tfpg wide = g;
    Edge& e = wide.edges[rng() % wide.edges.size()];
    if (e.tmin > 0 && rng() % 2) --e.tmin;
    if (e.tmax) e.tmax = rng() % 2 ? std::optional<std::int64_t>() : std::optional(*e.tmax + 1);
    wide.normalize();
    EXPECT_EQ(admits(wide, at), std::nullopt) << write_tfpg(wide);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Admits, ModeWideningCanBringDeadlinesForward) {
  // Counters pause outside an edge's modes, so enabling more modes makes a
  // finite deadline arrive sooner.
  Tfpg narrow = parse_tfpg("tfpg t; modes A, B; failure f; discrepancy d or; edge f -> d [0,1] {A};");
  Tfpg wide = parse_tfpg("tfpg t; modes A, B; failure f; discrepancy d or; edge f -> d [0,1] {*};");
  ActivationTrace at{{{"f", 0}}, {"B", "B", "B"}};
  EXPECT_EQ(admits(narrow, at), std::nullopt);
  EXPECT_TRUE(brute_force_admits(narrow, at));
  EXPECT_EQ(admits(wide, at), (Inconsistency{"d", 1, Reason::too_late}));
  EXPECT_FALSE(brute_force_admits(wide, at));
}

TEST(Binding, ParseAndWrite) {
  NodeBinding b = battery_binding();
  EXPECT_EQ(b.modes.size(), 3u);
  EXPECT_EQ(b.nodes.size(), 13u);
  NodeBinding again = parse_binding(write_binding(b));
  EXPECT_EQ(again.nodes, b.nodes);
  NodeBinding named = parse_binding("mode P : TRUE; failure F : G1_Off; discrepancy D and : !g1;");
  EXPECT_EQ(named.nodes[0].event, "G1_Off");
  EXPECT_EQ(write_binding(named), "mode P : TRUE;\nfailure F : G1_Off;\ndiscrepancy D and : !g1;\n");
  EXPECT_THROW(parse_binding("discrepancy D xor : TRUE;"), InputError);
  EXPECT_THROW(parse_binding("failure F; failure F;"), InputError);

  auto ext = load_fixture("battery_sensor");
  BoundModel bm(ext.xm, b);
  EXPECT_NO_THROW(bm.check_against(load_tfpg("battery_sensor.tfpg")));
  Tfpg wrong = load_tfpg("battery_sensor.tfpg");
  wrong.nodes["Sys_DEAD"] = NodeKind::or_node;
  EXPECT_THROW(bm.check_against(wrong), InputError);
  EXPECT_THROW(BoundModel(ext.xm, parse_binding("mode P : TRUE; failure X;")), InputError);
}

TEST(BatterySensor, MinimalCutSets) {
  auto ext = load_fixture("battery_sensor");
  auto tle = sts::parse_expr("!s1 & !s2");
  std::vector<analysis::CutSet> expected = {
      {"G1_Off", "G2_Off"}, {"G1_Off", "S2_Off"}, {"G2_Off", "S1_Off"}, {"S1_Off", "S2_Off"}};
  EXPECT_EQ(analysis::compute_mcs(ext.xm, tle, {}).mcs, expected);
  EXPECT_EQ(analysis::brute_force_mcs(ext.xm, tle, {}).mcs, expected);
}

TEST(Validate, BatteryGraphIsComplete) {
  auto ext = load_fixture("battery_sensor");
  Tfpg g = load_tfpg("battery_sensor_scaled.tfpg");
  ValidationOptions opt;
  opt.step_bound = 60;
  auto start = std::chrono::steady_clock::now();
  ValidationReport r = validate_behavioral(g, battery_binding(), ext.xm, opt);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_TRUE(r.complete);
  EXPECT_TRUE(r.counterexamples.empty());
  EXPECT_LT(secs, 60.0);
}

TEST(Validate, MissingEdgeGivesReplayableCounterexample) {
  auto ext = load_fixture("battery_sensor");
  Tfpg g = load_tfpg("battery_sensor_scaled.tfpg");
  g.edges.erase(std::find_if(g.edges.begin(), g.edges.end(),
                             [](const Edge& e) { return e.src == "B1_DEAD" && e.dst == "S2_NO"; }));
  ValidationOptions opt;
  opt.step_bound = 60;
  opt.max_counterexamples = 3;
  NodeBinding b = battery_binding();
  ValidationReport r = validate_behavioral(g, b, ext.xm, opt);
  ASSERT_FALSE(r.complete);
  ASSERT_FALSE(r.counterexamples.empty());
  BoundModel bm(ext.xm, b);
  for (const Counterexample& c : r.counterexamples) {
    ASSERT_EQ(c.trace.size(), r.counterexamples[0].trace.size());
    EXPECT_TRUE(bm.model().is_initial(c.trace[0]));
    for (std::size_t i = 1; i < c.trace.size(); ++i) EXPECT_TRUE(bm.model().is_transition(c.trace[i - 1], c.trace[i]));
    ActivationTrace at = bm.activation_trace(c.trace);
    EXPECT_EQ(admits(g, at), c.first);
    EXPECT_EQ(c.first.node, "S2_NO");
    EXPECT_EQ(c.first.reason, Reason::missing_cause);
    const std::size_t t = c.first.step;
    EXPECT_EQ(at.activated.at("S2_NO"), t);
    EXPECT_LE(at.activated.at("B1_DEAD"), t);
    EXPECT_EQ(at.mode[t], "S1");
    EXPECT_FALSE(at.activated.count("S2_Off"));
    EXPECT_EQ(t + 1, c.trace.size()) << "counterexamples end at the first violation";
  }
  // The reference semantics agrees on the shortest trace, and no shorter trace fails.
  EXPECT_FALSE(brute_force_admits(g, bm.activation_trace(r.counterexamples[0].trace)));
}

TEST(Validate, CompleteImpliesSampledTracesAdmitted) {
  auto ext = load_fixture("battery_sensor");
  Tfpg g = load_tfpg("battery_sensor_scaled.tfpg");
  NodeBinding b = battery_binding();
  ValidationOptions opt;
  opt.step_bound = 40;
  ASSERT_TRUE(validate_behavioral(g, b, ext.xm, opt).complete);
  BoundModel bm(ext.xm, b);
  std::mt19937 rng(3);
  for (int i = 0; i < 1000; ++i) {
    auto init = bm.model().initial_states();
    sts::Trace tr{init[rng() % init.size()]};
    std::size_t len = 1 + rng() % opt.step_bound;
    while (tr.size() < len) {
      auto succ = bm.model().successors(tr.back());
      tr.push_back(succ[rng() % succ.size()]);
    }
    ASSERT_EQ(admits(g, bm.activation_trace(tr)), std::nullopt);
  }
}

TEST(Validate, AgreesWithAdmitsOnRandomMutations) {
  // Shrinking bounds must be caught by validation whenever a sampled trace
  // already shows the graph is not complete.
  auto ext = load_fixture("battery_sensor");
  NodeBinding b = battery_binding();
  BoundModel bm(ext.xm, b);
  std::mt19937 rng(5);
  for (int round = 0; round < 6; ++round) {
    Tfpg g = load_tfpg("battery_sensor_scaled.tfpg");
    Edge& e = g.edges[rng() % g.edges.size()];
    e.tmax = e.tmin;
    if (rng() % 2) e.modes = std::vector<std::string>{g.modes[rng() % 3]};
    g.normalize();
    ValidationOptions opt;
    opt.step_bound = 25;
    ValidationReport r = validate_behavioral(g, b, ext.xm, opt);
    bool sampled_failure = false;
    std::size_t shortest = SIZE_MAX;
    for (int i = 0; i < 300; ++i) {
      auto init = bm.model().initial_states();
      sts::Trace tr{init[0]};
      while (tr.size() < opt.step_bound + 1) {
        auto succ = bm.model().successors(tr.back());
        tr.push_back(succ[rng() % succ.size()]);
      }
      for (std::size_t len = 1; len <= tr.size(); ++len) {
        sts::Trace prefix(tr.begin(), tr.begin() + len);
        if (admits(g, bm.activation_trace(prefix))) {
          sampled_failure = true;
          shortest = std::min(shortest, len);
          break;
        }
      }
    }
    if (sampled_failure) {
      ASSERT_FALSE(r.complete) << write_tfpg(g);
      EXPECT_LE(r.counterexamples[0].trace.size(), shortest);
    }
    if (!r.complete) {
      EXPECT_TRUE(admits(g, bm.activation_trace(r.counterexamples[0].trace)));
    }
  }
}

TEST(Synthesis, RecoversBatteryStructure) {
  auto ext = load_fixture("battery_sensor");
  NodeBinding b = battery_binding();
  Tfpg s = synthesize_structure(ext.xm, b, 30);
  Tfpg ref = load_tfpg("battery_sensor.tfpg");
  std::set<std::pair<std::string, std::string>> got, want;
  for (const Edge& e : s.edges) got.insert({e.src, e.dst});
  for (const Edge& e : ref.edges) want.insert({e.src, e.dst});
  EXPECT_EQ(got, want);
  EXPECT_EQ(s.nodes, ref.nodes);
  for (const Edge& e : s.edges) {
    EXPECT_EQ(e.tmin, 0);
    EXPECT_FALSE(e.tmax);
  }
  EXPECT_EQ(s.find_edge("B1_DEAD", "S2_NO")->modes, (std::vector<std::string>{"S1"}));

  Tfpg wide = s;
  for (Edge& e : wide.edges) e.modes.reset();
  ValidationOptions opt;
  opt.step_bound = 30;
  EXPECT_TRUE(validate_behavioral(wide, b, ext.xm, opt).complete);
}

TEST(Synthesis, ZeroDelayAndUnboundBehaviour) {
  auto ext = load_fixture("redundant_pair");
  NodeBinding b = parse_binding(
      "mode M : TRUE; failure fa; failure fb; failure fc;\n"
      "discrepancy A or : !a; discrepancy OUT or : !out;");
  Tfpg s = synthesize_structure(ext.xm, b, 6);
  std::set<std::pair<std::string, std::string>> got;
  for (const Edge& e : s.edges) got.insert({e.src, e.dst});
  // A follows fa in the same step. OUT is caused by fc directly or via A
  // together with b, which is not bound to any node.
  std::set<std::pair<std::string, std::string>> want = {{"fa", "A"}, {"A", "OUT"}, {"fc", "OUT"}, {"fb", "OUT"}};
  EXPECT_EQ(got, want);
  for (const auto& [id, k] : s.nodes) {
    if (k == NodeKind::failure) EXPECT_TRUE(s.incoming(id).empty());
  }
}
