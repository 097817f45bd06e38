#include <algorithm>
#include <map>
#include <set>

#include "safetk/fault/extension.hpp"
#include "safetk/format.hpp"
#include "safetk/lexer.hpp"

namespace safetk::fault {

using sts::Op;
using sts::ValueType;

std::vector<Instruction> parse_fei(std::string_view text) {
  std::vector<Instruction> out;
  std::set<std::string> names;
  TokenCursor cur(text);
  while (!cur.at_end()) {
    Instruction in;
    in.pos = cur.peek().pos;
    cur.expect_word("fault");
    SourcePos name_pos = cur.peek().pos;
    in.event = cur.expect_identifier("event name");
    if (!names.insert(in.event).second) throw InputError(name_pos, "duplicate fault event " + in.event);
    cur.expect_punct(":");
    cur.expect_word("target");
    in.target = cur.expect_identifier("target variable");
    cur.expect_punct(",");
    cur.expect_word("template");
    in.template_name = cur.expect_identifier("template name");
    if (cur.accept_punct("(")) {
      if (!cur.is_punct(")")) {
        do {
          in.args.push_back(sts::parse_expr(cur));
        } while (cur.accept_punct(","));
      }
      cur.expect_punct(")");
    }
    cur.expect_punct(",");
    cur.expect_word("dynamics");
    in.dynamics = cur.expect_identifier("dynamics name");
    cur.expect_punct(",");
    cur.expect_word("prob");
    SourcePos prob_pos = cur.peek().pos;
    in.probability = cur.expect_number();
    if (!(in.probability >= 0.0 && in.probability <= 1.0)) {
      throw InputError(prob_pos, "probability " + format_real(in.probability) + " outside [0,1]");
    }
    cur.expect_punct(";");
    out.push_back(std::move(in));
  }
  return out;
}

const EventInfo* ExtendedModel::find_event(std::string_view name) const {
  for (const EventInfo& e : events) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<std::string> ExtendedModel::event_names() const {
  std::vector<std::string> out;
  for (const EventInfo& e : events) out.push_back(e.name);
  return out;
}

ExtendedModel identity_extension(const sts::SymbolicModel& nominal) { return {nominal, {}}; }

namespace {

const char* kind_name(ValueType t) {
  switch (t) {
    case ValueType::boolean:
      return "boolean";
    case ValueType::integer:
      return "integer";
    case ValueType::enumeration:
      return "enumeration";
  }
  return "?";
}

// The lhs of a top-level conjunct `v = e` (INIT, INVAR) or `next(v) = e`
// (TRANS) is a defining occurrence of v; the whole conjunct moves to the
// renamed variable.
bool defines_var(const Expr& e, const std::string& v, bool trans) {
  if (e.op() != Op::eq) return false;
  for (const Expr& side : e.args()) {
    if (trans) {
      if (side.op() == Op::next && side.arg(0).op() == Op::ident && side.arg(0).name() == v) return true;
    } else if (side.op() == Op::ident && side.name() == v) {
      return true;
    }
  }
  return false;
}

Expr rename_defining(const Expr& e, const std::string& v, const std::string& to, bool trans) {
  if (e.op() == Op::and_) {
    Expr a = rename_defining(e.arg(0), v, to, trans);
    Expr b = rename_defining(e.arg(1), v, to, trans);
    if (a.same_node(e.arg(0)) && b.same_node(e.arg(1))) return e;
    return Expr::make(Op::and_, {a, b}, e.pos());
  }
  if (!defines_var(e, v, trans)) return e;
  return sts::rename_idents(e, [&](const std::string& n) { return n == v ? to : n; });
}

std::string first_message(const InputError& e) {
  return e.diagnostics().empty() ? e.what() : e.diagnostics().front().message;
}

}  // namespace

ExtendedModel extend_model(const sts::TypedModel& nominal, const FaultLibrary& library,
                           const std::vector<Instruction>& instructions) {
  ExtendedModel xm = identity_extension(nominal.source());
  sts::SymbolicModel& m = xm.model;
  std::vector<Diagnostic> diags;
  std::map<std::string, std::string> last_event;  // target -> latest event wrapping it
  std::set<std::string> events;
  for (const char* reserved : {"nominal", "faulty"}) {
    if (!instructions.empty() && m.declares(reserved)) {
      throw InputError(std::string("models to be extended may not declare ") + reserved);
    }
  }

  for (const Instruction& in : instructions) {
    auto fail = [&](const std::string& msg) { diags.push_back({in.pos, Severity::error, "fault " + in.event + ": " + msg}); };
    std::size_t before = diags.size();
    if (!events.insert(in.event).second) fail("duplicate fault event");
    auto vi = nominal.var_index(in.target);
    const FaultTemplate* tmpl = library.find_template(in.template_name);
    const DynamicsTemplate* dyn = library.find_dynamics(in.dynamics);
    if (!vi) fail("unknown target variable " + in.target);
    if (!tmpl) fail("unknown template " + in.template_name);
    if (!dyn) fail("unknown dynamics " + in.dynamics);
    if (!(in.probability >= 0.0 && in.probability <= 1.0)) fail("probability outside [0,1]");
    const std::string mode_var = "mode#" + in.event;
    if (m.declares(mode_var)) fail("name clash on " + mode_var);
    if (diags.size() != before) continue;

    const sts::VarInfo& target = nominal.var(*vi);
    if (!tmpl->applies.accepts(target.value_type)) {
      fail("template " + tmpl->name + " is not applicable to " + kind_name(target.value_type) + " variable " +
           in.target);
      continue;
    }
    if (in.args.size() != tmpl->params.size()) {
      fail("template " + tmpl->name + " expects " + std::to_string(tmpl->params.size()) + " argument(s), got " +
           std::to_string(in.args.size()));
      continue;
    }
    for (std::size_t i = 0; i < in.args.size(); ++i) {
      const Expr& arg = in.args[i];
      const auto& [pname, pkind] = tmpl->params[i];
      try {
        if (pkind == ParamKind::value) {
          for (const std::string& n : sts::identifiers(arg)) {
            if (nominal.source().declares(n)) throw InputError("argument " + pname + " must be a constant");
          }
          if (target.value_type == ValueType::enumeration &&
              (arg.op() != Op::ident ||
               std::find(target.type.literals.begin(), target.type.literals.end(), arg.name()) ==
                   target.type.literals.end())) {
            throw InputError("argument " + pname + " is not a value of " + in.target);
          }
        }
        ValueType want = pkind == ParamKind::condition ? ValueType::boolean : target.value_type;
        if (tmpl->name == "ramp_down") {
          if (arg.op() != Op::int_const || arg.int_value() <= 0) {
            throw InputError("argument step must be a positive integer constant");
          }
        }
        ValueType got = nominal.type_of(arg);
        if (got != want) {
          throw InputError(std::string("argument ") + pname + " has type " + kind_name(got) + ", expected " +
                           kind_name(want));
        }
      } catch (const InputError& e) {
        fail(first_message(e));
      }
    }
    if (diags.size() != before) continue;

    // Displace the current holder of the target's value.
    std::string holder;
    auto prev = last_event.find(in.target);
    if (prev == last_event.end()) {
      holder = in.target + "#nominal";
      if (m.declares(holder)) {
        fail("name clash on " + holder);
        continue;
      }
      for (sts::VarDecl& v : m.vars) {
        if (v.name == in.target) v.name = holder;
      }
      for (Expr& e : m.init) e = rename_defining(e, in.target, holder, false);
      for (Expr& e : m.invar) e = rename_defining(e, in.target, holder, false);
      for (Expr& e : m.trans) e = rename_defining(e, in.target, holder, true);
    } else {
      holder = in.target + "#" + prev->second;
      if (m.declares(holder)) {
        fail("name clash on " + holder);
        continue;
      }
      for (sts::DefineDecl& d : m.defines) {
        if (d.name == in.target) d.name = holder;
      }
    }
    last_event[in.target] = in.event;

    Expr mode = Expr::ident(mode_var);
    Expr is_faulty = eq(mode, Expr::ident("faulty"));
    m.vars.push_back({mode_var, sts::TypeSpec::enumeration({"nominal", "faulty"}), in.pos});
    m.init.push_back(eq(mode, Expr::ident("nominal")));
    Expr dyn_constraint = sts::rename_idents(dyn->constraint, [&](const std::string& n) {
      return n == "mode" ? mode_var : n;
    });
    if (!(dyn_constraint.op() == Op::bool_const && dyn_constraint.bool_value())) m.trans.push_back(dyn_constraint);

    // References to the target inside arguments denote the displaced value.
    std::vector<Expr> args;
    for (const Expr& a : in.args) {
      args.push_back(sts::rename_idents(a, [&](const std::string& n) { return n == in.target ? holder : n; }));
    }
    Expr effect;
    if (tmpl->name == "random" && tmpl->builtin) {
      std::string aux = "random#" + in.event;
      m.vars.push_back({aux, target.type, in.pos});
      effect = Expr::ident(aux);
    } else if (tmpl->name == "ramp_down" && tmpl->builtin) {
      std::string aux = "ramp#" + in.event;
      std::int64_t step = args[0].int_value();
      std::int64_t span = target.type.hi - target.type.lo;
      std::int64_t k = (span + step - 1) / step;
      Expr counter = Expr::ident(aux);
      m.vars.push_back({aux, sts::TypeSpec::range(0, k), in.pos});
      m.init.push_back(eq(counter, Expr::integer(0)));
      m.trans.push_back(
          eq(next(counter), ite(eq(next(mode), Expr::ident("faulty")),
                                Expr::make(Op::min, {Expr::make(Op::add, {counter, Expr::integer(1)}), Expr::integer(k)}),
                                Expr::integer(0))));
      effect = Expr::make(Op::max, {Expr::integer(target.type.lo),
                                    Expr::make(Op::sub, {Expr::ident(holder),
                                                         Expr::make(Op::mul, {Expr::integer(step), counter})})});
    } else {
      effect = sts::substitute(tmpl->effect, [&](const std::string& n) -> Expr {
        if (n == "nominal") return Expr::ident(holder);
        for (std::size_t i = 0; i < tmpl->params.size(); ++i) {
          if (tmpl->params[i].first == n) return args[i];
        }
        return Expr();
      });
    }
    m.defines.push_back({in.target, ite(is_faulty, effect, Expr::ident(holder)), in.pos});

    EventInfo ev;
    ev.name = in.event;
    ev.kind = EventKind::fault;
    ev.variable = mode_var;
    ev.occurrence = is_faulty;
    ev.probability = in.probability;
    ev.disable = {DisableConstraint::Section::invar, eq(mode, Expr::ident("nominal"))};
    xm.events.push_back(std::move(ev));
  }
  if (!diags.empty()) throw InputError(std::move(diags));
  try {
    sts::TypedModel check(m);
  } catch (const InputError& e) {
    std::vector<Diagnostic> d = e.diagnostics();
    for (Diagnostic& x : d) x.message = "extended model: " + x.message;
    throw InputError(std::move(d));
  }
  return xm;
}

std::string format_registry(const ExtendedModel& xm) {
  std::string out;
  for (const EventInfo& e : xm.events) {
    out += e.name;
    out += '\t';
    out += e.kind == EventKind::fault ? "fault" : "common-cause";
    out += '\t' + e.variable + '\t' + format_real(e.probability) + '\t' + sts::to_string(e.occurrence) + '\n';
  }
  return out;
}

}  // namespace safetk::fault
