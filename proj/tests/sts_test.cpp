#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "safetk/sts/explore.hpp"
#include "safetk/sts/typed_model.hpp"

using namespace safetk;
using namespace safetk::sts;

namespace {

TypedModel typed(const char* text) { return TypedModel(parse_model(text)); }

std::string first_error(const char* text) {
  try {
    typed(text);
  } catch (const InputError& e) {
    return e.diagnostics().empty() ? e.what() : e.diagnostics().front().message;
  }
  return {};
}

const char* kCounter = "MODULE m VAR x : 0..3; INIT x = 0; TRANS next(x) = x + 1;";

}  // namespace

TEST(Parse, MinimalModel) {
  SymbolicModel m = parse_model("MODULE m VAR x : boolean; INIT !x; TRANS next(x) = !x;");
  EXPECT_EQ(m.name, "m");
  EXPECT_EQ(m.vars.size(), 1u);
  EXPECT_EQ(m.init.size(), 1u);
  EXPECT_EQ(m.trans.size(), 1u);
}

TEST(Parse, RangeModelParsesDespiteOverflow) {
  SymbolicModel m = parse_model(kCounter);
  ASSERT_EQ(m.vars.size(), 1u);
  EXPECT_EQ(m.vars[0].type, TypeSpec::range(0, 3));
}

TEST(Parse, SyntaxErrorHasPosition) {
  try {
    parse_model("MODULE m\nVAR x : boolean\nINIT x;");
    FAIL();
  } catch (const InputError& e) {
    ASSERT_FALSE(e.diagnostics().empty());
    EXPECT_EQ(e.diagnostics()[0].pos.line, 3);
    EXPECT_NE(e.diagnostics()[0].message.find("';'"), std::string::npos);
  }
}

TEST(Parse, DuplicateAndUnknown) {
  EXPECT_THROW(parse_model("MODULE m VAR x : boolean; x : boolean;"), InputError);
  EXPECT_THROW(parse_model("MODULE m VAR x : boolean; INIT y;"), InputError);
  EXPECT_THROW(parse_model("MODULE m VAR x : boolean; DEFINE x := TRUE;"), InputError);
}

TEST(Parse, CaseDesugarsToIte) {
  Expr e = parse_expr("case a : 1; b : 2; TRUE : 3; esac");
  EXPECT_EQ(to_string(e), "a ? 1 : b ? 2 : 3");
  EXPECT_THROW(parse_expr("case a : 1; esac"), InputError);
}

TEST(Parse, RoundTrip) {
  const char* text = R"(
MODULE rt
VAR
  a : boolean;
  n : -2..5;
  c : {red, green, blue};
DEFINE
  d := n + 1 > 2 -> a;
  e := c in {red, blue} & !(a | d);
INIT
  n = -2 & c = red;
TRANS
  next(n) = (n < 5 ? n - -1 : min(n, 0) * 2);
  next(c) != c <-> a;
INVAR
  -(n) <= 2 | e;
)";
  SymbolicModel m = parse_model(text);
  std::string printed = print_model(m);
  SymbolicModel again = parse_model(printed);
  EXPECT_EQ(m, again);
  EXPECT_EQ(printed, print_model(again));
}

TEST(TypeCheck, Mismatch) {
  EXPECT_NE(first_error("MODULE m VAR x : boolean; INIT x = 3;").find("type mismatch"), std::string::npos);
}

TEST(TypeCheck, NextPlacement) {
  EXPECT_NE(first_error("MODULE m VAR x : boolean; INIT next(x);").find("next"), std::string::npos);
  EXPECT_NE(first_error("MODULE m VAR x : boolean; INVAR next(x);").find("next"), std::string::npos);
  EXPECT_NE(first_error("MODULE m VAR x : boolean; TRANS next(next(x));").find("nested"), std::string::npos);
  EXPECT_NE(first_error("MODULE m VAR x : boolean; DEFINE d := next(x); TRANS d;").find("next"),
            std::string::npos);
}

TEST(TypeCheck, CyclicDefine) {
  EXPECT_NE(first_error("MODULE m VAR x : boolean; DEFINE a := b; b := !a; INIT a;").find("cyclic"),
            std::string::npos);
}

TEST(TypeCheck, WellTyped) { EXPECT_NO_THROW(typed(kCounter)); }

TEST(Initial, SingleFalse) {
  TypedModel m = typed("MODULE m VAR x : boolean; INIT !x;");
  auto init = m.initial_states();
  ASSERT_EQ(init.size(), 1u);
  EXPECT_EQ(m.format_state(init[0]), "x=FALSE");
}

TEST(Initial, Unconstrained) {
  TypedModel m = typed("MODULE m VAR x : boolean; y : boolean;");
  EXPECT_EQ(m.initial_states().size(), 4u);
}

TEST(Initial, InvarFilters) {
  TypedModel m = typed("MODULE m VAR x : 0..9; INVAR x > 6;");
  EXPECT_EQ(m.initial_states().size(), 3u);
}

TEST(Successors, Counter) {
  TypedModel m = typed(kCounter);
  auto s = m.successors(State{1});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], State{2});
  EXPECT_TRUE(m.successors(State{3}).empty());
}

TEST(Successors, FreeBoolean) {
  TypedModel m = typed("MODULE m VAR v : boolean; w : boolean; TRANS next(w) = w;");
  auto s = m.successors(State{0, 1});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], (State{0, 1}));
  EXPECT_EQ(s[1], (State{1, 1}));
}

TEST(Successors, EnumAndDefines) {
  TypedModel m = typed(R"(
MODULE m
VAR c : {a, b, z}; k : 0..2;
DEFINE up := c = z;
TRANS next(c) = (c = a ? b : z); next(k) = (next(up) ? k : 0);
)");
  auto s = m.successors(State{0, 2});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(m.format_state(s[0]), "c=b, k=0");
  s = m.successors(State{1, 2});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(m.format_state(s[0]), "c=z, k=2");
}

TEST(Reach, CounterTrace) {
  TypedModel m = typed(kCounter);
  auto t = reach(m, parse_expr("x = 3"));
  ASSERT_TRUE(t);
  EXPECT_EQ(t->size(), 4u);
  EXPECT_FALSE(reach(m, parse_expr("x = 3"), 2));
  EXPECT_TRUE(reach(m, parse_expr("x = 3"), 3));
}

TEST(Reach, FalseTarget) {
  TypedModel m = typed(kCounter);
  EXPECT_FALSE(reach(m, parse_expr("FALSE")));
}

TEST(Reach, CapExceeded) {
  TypedModel m = typed("MODULE m VAR x : 0..99;");
  EXPECT_THROW(reach(m, parse_expr("FALSE"), std::nullopt, StateCap{10}), ResourceError);
}

// Breadth-first oracle over explicit successor sets, independent of StateStore.
TEST(Reach, ShortestAndReplayable) {
  TypedModel m = typed(R"(
MODULE m
VAR a : 0..5; b : 0..5;
INIT a = 0 & b = 0;
TRANS next(a) = a | next(a) = min(a + 2, 5);
TRANS next(b) = (next(a) > a ? b : min(b + 1, 5));
)");
  Program target = m.compile_state_predicate(parse_expr("a = 5 & b = 3"));
  auto t = reach(m, target);
  ASSERT_TRUE(t);
  EXPECT_TRUE(m.is_initial(t->front()));
  for (std::size_t i = 0; i + 1 < t->size(); ++i) EXPECT_TRUE(m.is_transition((*t)[i], (*t)[i + 1]));
  EXPECT_TRUE(m.holds(target, t->back()));

  std::set<State> seen;
  std::deque<std::pair<State, std::size_t>> q;
  for (const State& s : m.initial_states()) {
    seen.insert(s);
    q.emplace_back(s, 0);
  }
  std::size_t best = SIZE_MAX;
  while (!q.empty()) {
    auto [s, d] = q.front();
    q.pop_front();
    if (m.holds(target, s)) {
      best = d;
      break;
    }
    for (const State& n : m.successors(s)) {
      if (seen.insert(n).second) q.emplace_back(n, d + 1);
    }
  }
  EXPECT_EQ(t->size(), best + 1);
}

TEST(Graph, CounterGraph) {
  TypedModel m = typed(kCounter);
  StateGraph g(m);
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.successors(3).size(), 0u);
  EXPECT_FALSE(g.truncated());
  StateGraph g2(m, 1);
  EXPECT_EQ(g2.size(), 2u);
  EXPECT_TRUE(g2.truncated());
}
