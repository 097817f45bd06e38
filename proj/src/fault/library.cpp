#include <algorithm>

#include "safetk/fault/extension.hpp"
#include "safetk/lexer.hpp"

namespace safetk::fault {

using sts::Op;
using sts::ValueType;

bool Applicability::accepts(ValueType t) const {
  switch (t) {
    case ValueType::boolean:
      return boolean;
    case ValueType::integer:
      return integer;
    case ValueType::enumeration:
      return enumeration;
  }
  return false;
}

namespace {

Expr id(const char* n) { return Expr::ident(n); }

sts::TypeSpec representative(ValueType t) {
  switch (t) {
    case ValueType::boolean:
      return sts::TypeSpec::boolean();
    case ValueType::integer:
      return sts::TypeSpec::range(0, 1);
    case ValueType::enumeration:
      return sts::TypeSpec::enumeration({"lit#a", "lit#b"});
  }
  return {};
}

const char* kind_name(ValueType t) {
  switch (t) {
    case ValueType::boolean:
      return "boolean";
    case ValueType::integer:
      return "integer";
    case ValueType::enumeration:
      return "enum";
  }
  return "?";
}

// Value and expression parameters take the target's type; conditions are boolean.
void check_effect(const FaultTemplate& t, SourcePos pos) {
  for (ValueType vt : {ValueType::boolean, ValueType::integer, ValueType::enumeration}) {
    if (!t.applies.accepts(vt)) continue;
    sts::SymbolicModel m;
    m.name = "check";
    m.vars.push_back({"nominal", representative(vt), {}});
    for (const auto& [name, kind] : t.params) {
      m.vars.push_back({name, kind == ParamKind::condition ? sts::TypeSpec::boolean() : representative(vt), {}});
    }
    try {
      sts::TypedModel tm(m);
      if (tm.type_of(t.effect) != vt) {
        throw InputError(pos, "template " + t.name + ": effect is not of the target type for " +
                                  kind_name(vt) + " targets");
      }
    } catch (const InputError& e) {
      std::string msg = e.diagnostics().empty() ? e.what() : e.diagnostics().front().message;
      if (msg.rfind("template ", 0) == 0) throw;
      throw InputError(pos, "template " + t.name + ": ill-typed effect for " + kind_name(vt) + " targets: " + msg);
    }
  }
}

void check_dynamics(const DynamicsTemplate& d, SourcePos pos) {
  sts::SymbolicModel m;
  m.name = "check";
  m.vars.push_back({"mode", sts::TypeSpec::enumeration({"nominal", "faulty"}), {}});
  try {
    sts::TypedModel(m).compile_transition_predicate(d.constraint);
  } catch (const InputError& e) {
    std::string msg = e.diagnostics().empty() ? e.what() : e.diagnostics().front().message;
    throw InputError(pos, "dynamics " + d.name + ": " + msg);
  }
}

}  // namespace

FaultLibrary::FaultLibrary() {
  Expr faulty = eq(id("mode"), id("faulty"));
  templates_ = {
      {"stuck_at", {{"value", ParamKind::value}}, Applicability::any(), id("value"), true},
      {"inverted", {}, {true, false, false}, !id("nominal"), true},
      {"random", {}, Applicability::any(), Expr(), true},
      {"conditional",
       {{"guard", ParamKind::condition}, {"effect", ParamKind::expression}},
       Applicability::any(),
       ite(id("guard"), id("effect"), id("nominal")),
       true},
      {"ramp_down", {{"step", ParamKind::value}}, {false, true, false}, Expr(), true},
  };
  dynamics_ = {
      {"permanent", implies(faulty, eq(next(id("mode")), id("faulty"))), true},
      {"sporadic", Expr::boolean(true), true},
      {"transient", implies(faulty, eq(next(id("mode")), id("nominal"))), true},
  };
}

const FaultTemplate* FaultLibrary::find_template(std::string_view name) const {
  auto it = std::find_if(templates_.begin(), templates_.end(), [&](const auto& t) { return t.name == name; });
  return it == templates_.end() ? nullptr : &*it;
}

const DynamicsTemplate* FaultLibrary::find_dynamics(std::string_view name) const {
  auto it = std::find_if(dynamics_.begin(), dynamics_.end(), [&](const auto& d) { return d.name == name; });
  return it == dynamics_.end() ? nullptr : &*it;
}

void FaultLibrary::add(FaultTemplate t, SourcePos pos) {
  if (const FaultTemplate* old = find_template(t.name)) {
    throw InputError(pos, (old->builtin ? "redefinition of built-in template " : "duplicate template ") + t.name);
  }
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    const std::string& p = t.params[i].first;
    if (p == "nominal") throw InputError(pos, "template " + t.name + ": parameter may not be named nominal");
    for (std::size_t j = 0; j < i; ++j) {
      if (t.params[j].first == p) throw InputError(pos, "template " + t.name + ": duplicate parameter " + p);
    }
  }
  if (!t.applies.boolean && !t.applies.integer && !t.applies.enumeration) {
    throw InputError(pos, "template " + t.name + ": applies to no type");
  }
  t.builtin = false;
  check_effect(t, pos);
  templates_.push_back(std::move(t));
}

void FaultLibrary::add(DynamicsTemplate d, SourcePos pos) {
  if (const DynamicsTemplate* old = find_dynamics(d.name)) {
    throw InputError(pos, (old->builtin ? "redefinition of built-in dynamics " : "duplicate dynamics ") + d.name);
  }
  d.builtin = false;
  check_dynamics(d, pos);
  dynamics_.push_back(std::move(d));
}

FaultLibrary load_fault_library(std::string_view text) {
  FaultLibrary lib;
  TokenCursor cur(text);
  while (!cur.at_end()) {
    SourcePos pos = cur.peek().pos;
    if (cur.accept_word("template")) {
      FaultTemplate t;
      t.name = cur.expect_identifier("template name");
      if (cur.accept_punct("(")) {
        do {
          std::string p = cur.expect_identifier("parameter name");
          cur.expect_punct(":");
          ParamKind k;
          if (cur.accept_word("value")) {
            k = ParamKind::value;
          } else if (cur.accept_word("expression")) {
            k = ParamKind::expression;
          } else if (cur.accept_word("condition")) {
            k = ParamKind::condition;
          } else {
            cur.fail_expected("value, expression or condition");
          }
          t.params.emplace_back(std::move(p), k);
        } while (cur.accept_punct(","));
        cur.expect_punct(")");
      }
      cur.expect_word("applies");
      do {
        if (cur.accept_word("boolean")) {
          t.applies.boolean = true;
        } else if (cur.accept_word("integer")) {
          t.applies.integer = true;
        } else if (cur.accept_word("enum")) {
          t.applies.enumeration = true;
        } else if (cur.accept_word("any")) {
          t.applies = Applicability::any();
        } else {
          cur.fail_expected("boolean, integer, enum or any");
        }
      } while (cur.accept_punct("|"));
      cur.expect_word("effect");
      t.effect = sts::parse_expr(cur);
      cur.expect_punct(";");
      lib.add(std::move(t), pos);
    } else if (cur.accept_word("dynamics")) {
      DynamicsTemplate d;
      d.name = cur.expect_identifier("dynamics name");
      cur.expect_punct(":");
      d.constraint = sts::parse_expr(cur);
      cur.expect_punct(";");
      lib.add(std::move(d), pos);
    } else {
      cur.fail_expected("template or dynamics");
    }
  }
  return lib;
}

}  // namespace safetk::fault
