#include "safetk/cca/cca.hpp"

#include <algorithm>
#include <set>

#include "safetk/format.hpp"
#include "safetk/lexer.hpp"

namespace safetk::cca {

using sts::Expr;
using sts::Op;

Window CommonCauseSpec::window(const std::string& member) const {
  auto it = windows.find(member);
  return it == windows.end() ? Window{} : it->second;
}

std::vector<CommonCauseSpec> parse_cca(std::string_view text) {
  std::vector<CommonCauseSpec> out;
  std::set<std::string> ids;
  TokenCursor cur(text);
  while (!cur.at_end()) {
    CommonCauseSpec s;
    s.pos = cur.peek().pos;
    cur.expect_word("cc");
    SourcePos id_pos = cur.peek().pos;
    s.id = cur.expect_identifier("common cause name");
    if (!ids.insert(s.id).second) throw InputError(id_pos, "duplicate common cause " + s.id);
    cur.expect_punct(":");
    cur.expect_word("members");
    cur.expect_punct("{");
    do {
      SourcePos p = cur.peek().pos;
      std::string m = cur.expect_identifier("member event");
      if (std::find(s.members.begin(), s.members.end(), m) != s.members.end()) {
        throw InputError(p, "duplicate member " + m);
      }
      s.members.push_back(std::move(m));
    } while (cur.accept_punct(","));
    cur.expect_punct("}");
    cur.expect_punct(",");
    cur.expect_word("pattern");
    if (cur.accept_word("cascading")) {
      s.cascading = true;
      if (cur.accept_punct("{")) {
        if (!cur.is_punct("}")) {
          do {
            SourcePos p = cur.peek().pos;
            std::string m = cur.expect_identifier("member event");
            cur.expect_punct(":");
            cur.expect_punct("[");
            Window w;
            w.lo = cur.expect_integer();
            cur.expect_punct(",");
            w.hi = cur.expect_integer();
            cur.expect_punct("]");
            if (w.lo < 0 || w.lo > w.hi) {
              throw InputError(p, "invalid window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) + "] for " + m);
            }
            if (!s.windows.emplace(m, w).second) throw InputError(p, "duplicate window for " + m);
          } while (cur.accept_punct(","));
        }
        cur.expect_punct("}");
      }
    } else {
      cur.expect_word("simultaneous");
    }
    cur.expect_punct(",");
    cur.expect_word("prob");
    SourcePos prob_pos = cur.peek().pos;
    s.probability = cur.expect_number();
    if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
      throw InputError(prob_pos, "probability " + format_real(s.probability) + " outside [0,1]");
    }
    cur.expect_punct(";");
    out.push_back(std::move(s));
  }
  return out;
}

fault::ExtendedModel apply_cca(const fault::ExtendedModel& xm, const std::vector<CommonCauseSpec>& specs) {
  fault::ExtendedModel out = xm;
  sts::SymbolicModel& m = out.model;
  std::vector<Diagnostic> diags;
  std::set<std::string> governed;
  std::set<std::string> ids;
  for (const CommonCauseSpec& s : specs) {
    auto fail = [&](const std::string& msg) { diags.push_back({s.pos, Severity::error, "cc " + s.id + ": " + msg}); };
    std::size_t before = diags.size();
    const std::string var = "cc#" + s.id;
    const std::string clock = var + ".clock";
    if (!ids.insert(s.id).second) fail("duplicate common cause");
    if (out.find_event(s.id)) fail("name clash with event " + s.id);
    if (m.declares(var) || m.declares(clock)) fail("name clash on " + var);
    if (s.members.size() < 2) fail("a common cause needs at least two members");
    for (const std::string& mem : s.members) {
      const fault::EventInfo* e = out.find_event(mem);
      if (!e || e->kind != fault::EventKind::fault) {
        fail("unknown member " + mem);
      } else if (!governed.insert(mem).second) {
        fail("member " + mem + " already belongs to another common cause");
      }
    }
    for (const auto& [mem, w] : s.windows) {
      if (std::find(s.members.begin(), s.members.end(), mem) == s.members.end()) {
        fail("window for non-member " + mem);
      }
      if (w.lo < 0 || w.lo > w.hi) fail("invalid window for " + mem);
    }
    if (diags.size() != before) continue;

    std::int64_t horizon = 0;
    for (const std::string& mem : s.members) horizon = std::max(horizon, s.window(mem).hi);
    Expr cc = Expr::ident(var);
    Expr clk = Expr::ident(clock);
    m.vars.push_back({var, sts::TypeSpec::boolean(), s.pos});
    m.vars.push_back({clock, sts::TypeSpec::range(0, horizon + 1), s.pos});
    m.init.push_back(!cc);
    m.init.push_back(eq(clk, Expr::integer(0)));
    m.trans.push_back(implies(cc, next(cc)));
    m.trans.push_back(eq(next(clk), ite(cc & next(cc),
                                        Expr::make(Op::min, {Expr::make(Op::add, {clk, Expr::integer(1)}),
                                                             Expr::integer(horizon + 1)}),
                                        Expr::integer(0))));
    for (const std::string& mem : s.members) {
      fault::EventInfo& e = *std::find_if(out.events.begin(), out.events.end(),
                                          [&](const fault::EventInfo& x) { return x.name == mem; });
      Window w = s.window(mem);
      m.invar.push_back(implies(cc & eq(clk, Expr::integer(w.hi)), e.occurrence));
      Expr in_window = cc & Expr::make(Op::ge, {clk, Expr::integer(w.lo)}) &
                       Expr::make(Op::le, {clk, Expr::integer(w.hi)});
      e.disable = {fault::DisableConstraint::Section::trans,
                   implies((!e.occurrence) & next(e.occurrence), next(in_window))};
    }
    fault::EventInfo ev;
    ev.name = s.id;
    ev.kind = fault::EventKind::common_cause;
    ev.variable = var;
    ev.occurrence = cc;
    ev.probability = s.probability;
    ev.disable = {fault::DisableConstraint::Section::invar, !cc};
    ev.members = s.members;
    out.events.push_back(std::move(ev));
  }
  if (!diags.empty()) throw InputError(std::move(diags));
  sts::TypedModel check(m);
  return out;
}

std::vector<DependencyGroup> dependency_groups(const std::vector<CommonCauseSpec>& specs) {
  std::vector<DependencyGroup> out;
  for (const CommonCauseSpec& s : specs) out.push_back({s.id, s.members, s.probability});
  return out;
}

}  // namespace safetk::cca
