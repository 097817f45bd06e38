#include <gtest/gtest.h>

#include "random_models.hpp"
#include "safetk/fmea/fmea.hpp"
#include "test_util.hpp"

using namespace safetk;
using namespace safetk::fmea;
using analysis::CutSet;
using sts::parse_expr;

namespace {

using Labels = std::vector<std::string>;

std::vector<Property> props(std::initializer_list<std::pair<const char*, const char*>> ps) {
  std::vector<Property> out;
  for (const auto& [l, e] : ps) out.push_back({l, parse_expr(e)});
  return out;
}

// Per row, recheck each property by reachability with only the row's faults.
void expect_rows_witnessed(const fault::ExtendedModel& xm, const FmeaTable& t) {
  for (const FmeaRow& r : t.rows) {
    for (const Property& p : t.properties) {
      bool listed = std::find(r.violated.begin(), r.violated.end(), p.label) != r.violated.end();
      bool reachable = analysis::witness(xm, p.expr, r.faults, {}).has_value();
      EXPECT_EQ(listed, reachable) << p.label;
    }
  }
}

}  // namespace

TEST(Fmea, SinglePropertyEqualsMcs) {
  auto ext = load_fixture("redundant_pair");
  FmeaTable t = generate_fmea(ext.xm, props({{"TLE", "!out"}}), {});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], (FmeaRow{{"fc"}, std::nullopt, {"TLE"}, {"TLE"}}));
  EXPECT_EQ(t.rows[1], (FmeaRow{{"fa", "fb"}, std::nullopt, {"TLE"}, {"TLE"}}));
  EXPECT_TRUE(t.complete);
}

TEST(Fmea, FalsePropertyGivesEmptyTable) {
  auto ext = load_fixture("redundant_pair");
  FmeaTable t = generate_fmea(ext.xm, props({{"P", "FALSE"}}), {});
  EXPECT_TRUE(t.rows.empty());
  EXPECT_EQ(export_fmea(t, FmeaFormat::tsv), "faults\tviolated\tminimal_for\n");
}

TEST(Fmea, ViolatedSetIsMaximal) {
  auto ext = load_fixture("redundant_pair");
  FmeaTable t = generate_fmea(ext.xm, props({{"P1", "!a"}, {"P2", "!a & !b"}}), {});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], (FmeaRow{{"fa"}, std::nullopt, {"P1"}, {"P1"}}));
  // {fa, fb} is minimal only for P2 but also violates P1.
  EXPECT_EQ(t.rows[1], (FmeaRow{{"fa", "fb"}, std::nullopt, {"P1", "P2"}, {"P2"}}));
  expect_rows_witnessed(ext.xm, t);
}

TEST(Fmea, ConsistentWithFaultTreeAnalysis) {
  for (unsigned seed = 11; seed <= 16; ++seed) {
    RandomModel a = make_random_model(seed, 4);
    RandomModel b = make_random_model(seed + 100, 4);
    auto ext = build_extension({a.smx, "", a.fei, ""});
    // The second TLE is reinterpreted over the first model's variables.
    auto ps = props({{"P1", a.tle.c_str()}, {"P2", b.tle.c_str()}});
    FmeaTable t = generate_fmea(ext.xm, ps, {});
    for (const Property& p : ps) {
      std::vector<CutSet> rows;
      for (const FmeaRow& r : t.rows) {
        if (std::find(r.minimal_for.begin(), r.minimal_for.end(), p.label) != r.minimal_for.end()) rows.push_back(r.faults);
      }
      EXPECT_EQ(rows, analysis::brute_force_mcs(ext.xm, p.expr, {}).mcs) << to_string(p.expr);
    }
    expect_rows_witnessed(ext.xm, t);
  }
}

TEST(Fmea, DuplicateLabelsRejected) {
  auto ext = load_fixture("redundant_pair");
  EXPECT_THROW(generate_fmea(ext.xm, props({{"P", "!a"}, {"P", "!b"}}), {}), InputError);
  EXPECT_THROW(parse_properties("P: !a; P: !b;"), InputError);
  auto ps = parse_properties("-- two\nP1: !a;\nP2: a ? !b : FALSE;\n");
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[1].label, "P2");
  EXPECT_THROW(parse_properties("P1 !a;"), InputError);
}

TEST(DynamicFmea, Orders) {
  auto latch = load_fixture("latch");
  FmeaTable t = generate_dynamic_fmea(latch.xm, props({{"TRIP", "trip"}}), {});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].ordering, (analysis::Order{"fa", "fb"}));

  auto sym = load_fixture("symmetric");
  FmeaTable s = generate_dynamic_fmea(sym.xm, props({{"TLE", "!out"}}), {});
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].ordering, (analysis::Order{"fa", "fb"}));
  EXPECT_EQ(s.rows[1].ordering, (analysis::Order{"fb", "fa"}));

  auto rp = load_fixture("redundant_pair");
  FmeaTable r = generate_dynamic_fmea(rp.xm, props({{"TLE", "!out"}}), {});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].faults, CutSet{"fc"});
  EXPECT_EQ(r.rows[0].ordering, (analysis::Order{"fc"}));
}

TEST(DynamicFmea, SubsetViolationsDependOnOrder) {
  auto latch = load_fixture("latch");
  FmeaTable t = generate_dynamic_fmea(latch.xm, props({{"TRIP", "trip"}, {"NOX", "!x"}}), {});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], (FmeaRow{{"fa"}, analysis::Order{"fa"}, {"NOX"}, {"NOX"}}));
  EXPECT_EQ(t.rows[1], (FmeaRow{{"fa", "fb"}, analysis::Order{"fa", "fb"}, {"TRIP", "NOX"}, {"TRIP"}}));
}

TEST(FmeaExport, TsvAndXml) {
  auto rp = load_fixture("redundant_pair");
  FmeaTable t = generate_fmea(rp.xm, props({{"TLE", "!out"}}), {});
  EXPECT_EQ(export_fmea(t, FmeaFormat::tsv), "faults\tviolated\tminimal_for\nfc\tTLE\tTLE\nfa,fb\tTLE\tTLE\n");
  EXPECT_EQ(import_fmea_xml(export_fmea(t, FmeaFormat::xml)), t);

  auto latch = load_fixture("latch");
  analysis::AnalysisOptions o;
  o.step_bound = 4;
  FmeaTable d = generate_dynamic_fmea(latch.xm, props({{"TRIP", "trip"}, {"NOX", "!x"}}), o);
  std::string xml = export_fmea(d, FmeaFormat::xml);
  EXPECT_EQ(import_fmea_xml(xml), d);
  EXPECT_EQ(export_fmea(import_fmea_xml(xml), FmeaFormat::xml), xml);
  EXPECT_EQ(export_fmea(d, FmeaFormat::tsv).substr(0, 31), "faults\torder\tviolated\tminimal_f");
  EXPECT_THROW(import_fmea_xml("<fmea max-card=\"2\"><row><fault event=\"a\"/></row></fmea>"), InputError);
}
