#include "safetk/sts/typed_model.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace safetk::sts {

namespace {

const char* type_name(ValueType t) {
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

void collect_reads(const Program& p, std::uint32_t node, Program::Code code,
                   std::set<std::uint32_t>& out) {
  const Program::Node& n = p.nodes[node];
  if (n.code == code) out.insert(static_cast<std::uint32_t>(n.value));
  for (std::uint32_t k = 0; k < n.num_kids; ++k) collect_reads(p, p.kids[n.first_kid + k], code, out);
}

}  // namespace

// Type checker and code generator. Defines are inlined at every use site,
// shifted into the next frame when used under `next(...)`.
class Compiler {
 public:
  enum class Context { state, transition };

  Compiler(const TypedModel& model, std::vector<Diagnostic>& diags) : model_(model), diags_(diags) {}

  Program compile(const Expr& e, Context ctx, bool shift_to_next, bool require_bool) {
    Program p;
    prog_ = &p;
    ctx_ = ctx;
    auto [root, type] = gen(e, shift_to_next);
    p.root = root;
    p.type = type;
    if (require_bool && type != ValueType::boolean) {
      error(e.pos(), std::string("expected a boolean expression, found ") + type_name(type));
    }
    std::set<std::uint32_t> cur, nxt;
    collect_reads(p, p.root, Program::Code::var_cur, cur);
    collect_reads(p, p.root, Program::Code::var_next, nxt);
    p.cur_vars.assign(cur.begin(), cur.end());
    p.next_vars.assign(nxt.begin(), nxt.end());
    prog_ = nullptr;
    return p;
  }

  ValueType define_type(const std::string& name, SourcePos pos) {
    auto it = define_types_.find(name);
    if (it != define_types_.end()) return it->second;
    if (visiting_.count(name)) {
      error(pos, "cyclic definition involving " + name);
      return ValueType::boolean;
    }
    visiting_.insert(name);
    Program scratch;
    Program* saved = prog_;
    Context saved_ctx = ctx_;
    prog_ = &scratch;
    ctx_ = Context::state;
    ValueType t = gen(model_.source().find_define(name)->body, false).second;
    prog_ = saved;
    ctx_ = saved_ctx;
    visiting_.erase(name);
    define_types_[name] = t;
    return t;
  }

 private:
  using Code = Program::Code;

  void error(SourcePos pos, std::string msg) {
    diags_.push_back({pos, Severity::error, std::move(msg)});
  }

  std::uint32_t emit(Code code, std::int64_t value, const std::vector<std::uint32_t>& kids) {
    Program::Node n;
    n.code = code;
    n.value = value;
    n.first_kid = static_cast<std::uint32_t>(prog_->kids.size());
    n.num_kids = static_cast<std::uint32_t>(kids.size());
    prog_->kids.insert(prog_->kids.end(), kids.begin(), kids.end());
    prog_->nodes.push_back(n);
    return static_cast<std::uint32_t>(prog_->nodes.size() - 1);
  }

  std::pair<std::uint32_t, ValueType> gen(const Expr& e, bool shifted) {
    switch (e.op()) {
      case Op::bool_const:
        return {emit(Code::constant, e.bool_value() ? 1 : 0, {}), ValueType::boolean};
      case Op::int_const:
        return {emit(Code::constant, e.int_value(), {}), ValueType::integer};
      case Op::ident:
        return ident(e, shifted);
      case Op::next: {
        if (ctx_ != Context::transition) {
          error(e.pos(), "next() is only allowed in TRANS constraints");
        } else if (shifted) {
          error(e.pos(), "nested next()");
        }
        return gen(e.arg(0), true);
      }
      case Op::not_: {
        auto a = expect(e.arg(0), shifted, ValueType::boolean);
        return {emit(Code::not_, 0, {a}), ValueType::boolean};
      }
      case Op::neg: {
        auto a = expect(e.arg(0), shifted, ValueType::integer);
        return {emit(Code::neg, 0, {a}), ValueType::integer};
      }
      case Op::and_:
      case Op::or_:
      case Op::implies:
      case Op::iff: {
        auto a = expect(e.arg(0), shifted, ValueType::boolean);
        auto b = expect(e.arg(1), shifted, ValueType::boolean);
        Code c = e.op() == Op::and_ ? Code::and_
                 : e.op() == Op::or_ ? Code::or_
                 : e.op() == Op::implies ? Code::implies
                                          : Code::iff;
        return {emit(c, 0, {a, b}), ValueType::boolean};
      }
      case Op::eq:
      case Op::ne: {
        auto [a, ta] = gen(e.arg(0), shifted);
        auto [b, tb] = gen(e.arg(1), shifted);
        if (ta != tb) {
          error(e.pos(), std::string("type mismatch: cannot compare ") + type_name(ta) + " with " +
                             type_name(tb));
        }
        return {emit(e.op() == Op::eq ? Code::eq : Code::ne, 0, {a, b}), ValueType::boolean};
      }
      case Op::lt:
      case Op::le:
      case Op::gt:
      case Op::ge: {
        auto a = expect(e.arg(0), shifted, ValueType::integer);
        auto b = expect(e.arg(1), shifted, ValueType::integer);
        Code c = e.op() == Op::lt ? Code::lt : e.op() == Op::le ? Code::le : e.op() == Op::gt ? Code::gt : Code::ge;
        return {emit(c, 0, {a, b}), ValueType::boolean};
      }
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::min:
      case Op::max: {
        auto a = expect(e.arg(0), shifted, ValueType::integer);
        auto b = expect(e.arg(1), shifted, ValueType::integer);
        Code c = e.op() == Op::add ? Code::add
                 : e.op() == Op::sub ? Code::sub
                 : e.op() == Op::mul ? Code::mul
                 : e.op() == Op::min ? Code::min
                                      : Code::max;
        return {emit(c, 0, {a, b}), ValueType::integer};
      }
      case Op::ite: {
        auto c = expect(e.arg(0), shifted, ValueType::boolean);
        auto [t, tt] = gen(e.arg(1), shifted);
        auto [f, tf] = gen(e.arg(2), shifted);
        if (tt != tf) {
          error(e.pos(), std::string("type mismatch: branches are ") + type_name(tt) + " and " +
                             type_name(tf));
        }
        return {emit(Code::ite, 0, {c, t, f}), tt};
      }
      case Op::in: {
        auto [a, ta] = gen(e.arg(0), shifted);
        std::vector<std::uint32_t> kids{a};
        for (std::size_t i = 1; i < e.args().size(); ++i) kids.push_back(expect(e.arg(i), shifted, ta));
        return {emit(Code::in, 0, kids), ValueType::boolean};
      }
    }
    return {emit(Code::constant, 0, {}), ValueType::boolean};
  }

  std::uint32_t expect(const Expr& e, bool shifted, ValueType want) {
    auto [n, t] = gen(e, shifted);
    if (t != want) {
      error(e.pos(), std::string("type mismatch: expected ") + type_name(want) + ", found " + type_name(t));
    }
    return n;
  }

  std::pair<std::uint32_t, ValueType> ident(const Expr& e, bool shifted) {
    const std::string& name = e.name();
    if (auto vi = model_.var_index(name)) {
      return {emit(shifted ? Code::var_next : Code::var_cur, static_cast<std::int64_t>(*vi), {}),
              model_.var(*vi).value_type};
    }
    if (const DefineDecl* d = model_.source().find_define(name)) {
      if (visiting_.count(name)) {
        error(e.pos(), "cyclic definition involving " + name);
        return {emit(Code::constant, 0, {}), ValueType::boolean};
      }
      define_type(name, e.pos());
      visiting_.insert(name);
      Context saved = ctx_;
      // A define body is a current-state expression; `next` inside it is rejected.
      ctx_ = Context::state;
      auto r = gen(d->body, shifted);
      ctx_ = saved;
      visiting_.erase(name);
      return r;
    }
    auto lit = model_.literal_ids_.find(name);
    if (lit != model_.literal_ids_.end()) {
      return {emit(Code::constant, lit->second, {}), ValueType::enumeration};
    }
    error(e.pos(), "undeclared symbol: " + name);
    return {emit(Code::constant, 0, {}), ValueType::boolean};
  }

  const TypedModel& model_;
  std::vector<Diagnostic>& diags_;
  Program* prog_ = nullptr;
  Context ctx_ = Context::state;
  std::set<std::string> visiting_;
  std::unordered_map<std::string, ValueType> define_types_;
};

TypedModel::TypedModel(SymbolicModel m) : source_(std::move(m)) { build(); }

void TypedModel::build() {
  std::vector<Diagnostic> diags;
  std::set<std::string> names;
  for (const VarDecl& v : source_.vars) {
    if (!names.insert(v.name).second) diags.push_back({v.pos, Severity::error, "duplicate declaration: " + v.name});
    VarInfo info;
    info.name = v.name;
    info.type = v.type;
    switch (v.type.kind) {
      case TypeSpec::Kind::boolean:
        info.value_type = ValueType::boolean;
        info.values = {0, 1};
        break;
      case TypeSpec::Kind::range:
        info.value_type = ValueType::integer;
        if (v.type.hi - v.type.lo > 1'000'000) {
          diags.push_back({v.pos, Severity::error, "range too large for explicit enumeration: " + v.name});
        }
        for (std::int64_t x = v.type.lo; x <= v.type.hi && x - v.type.lo <= 1'000'000; ++x) info.values.push_back(x);
        break;
      case TypeSpec::Kind::enumeration:
        info.value_type = ValueType::enumeration;
        if (v.type.literals.empty()) diags.push_back({v.pos, Severity::error, "empty enumeration: " + v.name});
        for (const std::string& l : v.type.literals) {
          auto [it, fresh] = literal_ids_.emplace(l, static_cast<std::int64_t>(literals_.size()));
          if (fresh) literals_.push_back(l);
          info.values.push_back(it->second);
        }
        break;
    }
    var_index_.emplace(v.name, vars_.size());
    vars_.push_back(std::move(info));
  }
  for (const DefineDecl& d : source_.defines) {
    if (!names.insert(d.name).second) diags.push_back({d.pos, Severity::error, "duplicate declaration: " + d.name});
  }

  Compiler compiler(*this, diags);
  for (const DefineDecl& d : source_.defines) compiler.define_type(d.name, d.pos);

  std::vector<Program> init_progs;
  std::vector<Program> trans_progs;
  auto split = [](const std::vector<Expr>& section) {
    std::vector<Expr> out;
    for (const Expr& e : section) flatten_conjuncts(e, out);
    return out;
  };
  for (const Expr& e : split(source_.init)) {
    init_progs.push_back(compiler.compile(e, Compiler::Context::state, false, true));
  }
  for (const Expr& e : split(source_.invar)) {
    init_progs.push_back(compiler.compile(e, Compiler::Context::state, false, true));
    trans_progs.push_back(compiler.compile(e, Compiler::Context::state, true, true));
  }
  for (const Expr& e : split(source_.trans)) {
    trans_progs.push_back(compiler.compile(e, Compiler::Context::transition, false, true));
  }
  if (!diags.empty()) throw InputError(std::move(diags));
  init_checks_ = init_progs;
  trans_checks_ = trans_progs;
  init_solver_ = make_solver(std::move(init_progs), true);
  trans_solver_ = make_solver(std::move(trans_progs), false);
}

std::optional<std::size_t> TypedModel::var_index(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

std::int64_t TypedModel::literal_id(std::string_view lit) const {
  auto it = literal_ids_.find(std::string(lit));
  if (it == literal_ids_.end()) throw InputError("unknown enumeration literal: " + std::string(lit));
  return it->second;
}

Program TypedModel::compile_state_predicate(const Expr& e) const {
  std::vector<Diagnostic> diags;
  Compiler c(*this, diags);
  Program p = c.compile(e, Compiler::Context::state, false, true);
  if (!diags.empty()) throw InputError(std::move(diags));
  return p;
}

Program TypedModel::compile_transition_predicate(const Expr& e) const {
  std::vector<Diagnostic> diags;
  Compiler c(*this, diags);
  Program p = c.compile(e, Compiler::Context::transition, false, true);
  if (!diags.empty()) throw InputError(std::move(diags));
  return p;
}

ValueType TypedModel::type_of(const Expr& e) const {
  std::vector<Diagnostic> diags;
  Compiler c(*this, diags);
  Program p = c.compile(e, Compiler::Context::state, false, false);
  if (!diags.empty()) throw InputError(std::move(diags));
  return p.type;
}

namespace {

std::int64_t eval_node(const Program& p, std::uint32_t idx, const std::vector<VarInfo>& vars,
                       StateView cur, StateView nxt) {
  using Code = Program::Code;
  const Program::Node& n = p.nodes[idx];
  auto kid = [&](std::uint32_t k) { return eval_node(p, p.kids[n.first_kid + k], vars, cur, nxt); };
  switch (n.code) {
    case Code::constant:
      return n.value;
    case Code::var_cur:
      return vars[n.value].values[cur[n.value]];
    case Code::var_next:
      return vars[n.value].values[nxt[n.value]];
    case Code::not_:
      return kid(0) ? 0 : 1;
    case Code::neg:
      return -kid(0);
    case Code::and_:
      return kid(0) && kid(1);
    case Code::or_:
      return kid(0) || kid(1);
    case Code::implies:
      return !kid(0) || kid(1);
    case Code::iff:
      return (kid(0) != 0) == (kid(1) != 0);
    case Code::eq:
      return kid(0) == kid(1);
    case Code::ne:
      return kid(0) != kid(1);
    case Code::lt:
      return kid(0) < kid(1);
    case Code::le:
      return kid(0) <= kid(1);
    case Code::gt:
      return kid(0) > kid(1);
    case Code::ge:
      return kid(0) >= kid(1);
    case Code::add:
      return kid(0) + kid(1);
    case Code::sub:
      return kid(0) - kid(1);
    case Code::mul:
      return kid(0) * kid(1);
    case Code::ite:
      return kid(0) ? kid(1) : kid(2);
    case Code::in: {
      std::int64_t v = kid(0);
      for (std::uint32_t k = 1; k < n.num_kids; ++k) {
        if (kid(k) == v) return 1;
      }
      return 0;
    }
    case Code::min:
      return std::min(kid(0), kid(1));
    case Code::max:
      return std::max(kid(0), kid(1));
  }
  return 0;
}

}  // namespace

std::int64_t TypedModel::eval(const Program& p, StateView cur, StateView next) const {
  return eval_node(p, p.root, vars_, cur, next);
}

std::optional<std::int32_t> TypedModel::value_index(std::size_t var, std::int64_t semantic) const {
  const VarInfo& v = vars_[var];
  switch (v.value_type) {
    case ValueType::boolean:
      return semantic ? 1 : 0;
    case ValueType::integer:
      if (semantic < v.type.lo || semantic > v.type.hi) return std::nullopt;
      return static_cast<std::int32_t>(semantic - v.type.lo);
    case ValueType::enumeration:
      for (std::size_t i = 0; i < v.values.size(); ++i) {
        if (v.values[i] == semantic) return static_cast<std::int32_t>(i);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

TypedModel::Solver TypedModel::make_solver(std::vector<Program> constraints, bool assign_current) const {
  using Code = Program::Code;
  const Code assigned_code = assign_current ? Code::var_cur : Code::var_next;
  auto assigned_reads = [&](const Program& p) {
    return assign_current ? p.cur_vars : p.next_vars;
  };

  // Functional candidates: conjuncts `v' = e` where e does not read v'.
  struct Candidate {
    std::uint32_t var;
    Program expr;
    std::set<std::uint32_t> deps;
  };
  std::vector<Candidate> candidates;
  for (const Program& p : constraints) {
    const Program::Node& root = p.nodes[p.root];
    if (root.code != Code::eq) continue;
    for (int side = 0; side < 2; ++side) {
      std::uint32_t lhs = p.kids[root.first_kid + side];
      std::uint32_t rhs = p.kids[root.first_kid + 1 - side];
      if (p.nodes[lhs].code != assigned_code) continue;
      auto var = static_cast<std::uint32_t>(p.nodes[lhs].value);
      std::set<std::uint32_t> deps;
      collect_reads(p, rhs, assigned_code, deps);
      if (deps.count(var)) continue;
      Program sub = p;
      sub.root = rhs;
      sub.type = vars_[var].value_type;
      candidates.push_back({var, std::move(sub), std::move(deps)});
      break;
    }
  }

  Solver s;
  const std::size_t n = vars_.size();
  std::vector<bool> chosen(n, false);
  std::vector<std::uint32_t> position(n, 0);
  for (std::size_t step = 0; step < n; ++step) {
    std::optional<std::size_t> pick_candidate;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Candidate& cand = candidates[c];
      if (chosen[cand.var]) continue;
      bool ready = std::all_of(cand.deps.begin(), cand.deps.end(), [&](std::uint32_t d) { return chosen[d]; });
      if (ready && (!pick_candidate || cand.var < candidates[*pick_candidate].var)) pick_candidate = c;
    }
    std::uint32_t var;
    if (pick_candidate) {
      var = candidates[*pick_candidate].var;
      s.functional.push_back(candidates[*pick_candidate].expr);
    } else {
      var = static_cast<std::uint32_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      s.functional.push_back(std::nullopt);
    }
    chosen[var] = true;
    position[var] = static_cast<std::uint32_t>(step);
    s.order.push_back(var);
  }
  for (Program& p : constraints) {
    Constraint c;
    const auto reads = assigned_reads(p);
    c.ground = reads.empty();
    for (std::uint32_t v : reads) c.check_at = std::max(c.check_at, position[v]);
    c.program = std::move(p);
    s.constraints.push_back(std::move(c));
  }
  return s;
}

void TypedModel::solve(const Solver& solver, StateView fixed, bool assign_current,
                       std::vector<State>& out) const {
  const std::size_t n = vars_.size();
  State work(n, 0);
  auto holds_on = [&](const Program& p) {
    return assign_current ? holds(p, work, {}) : holds(p, fixed, work);
  };
  for (const Constraint& c : solver.constraints) {
    if (c.ground && !holds_on(c.program)) return;
  }
  std::vector<std::vector<const Program*>> checks(n);
  for (const Constraint& c : solver.constraints) {
    if (!c.ground) checks[c.check_at].push_back(&c.program);
  }
  std::function<void(std::size_t)> assign = [&](std::size_t pos) {
    if (pos == n) {
      out.push_back(work);
      return;
    }
    std::uint32_t var = solver.order[pos];
    auto try_value = [&](std::int32_t idx) {
      work[var] = idx;
      for (const Program* p : checks[pos]) {
        if (!holds_on(*p)) return;
      }
      assign(pos + 1);
    };
    if (solver.functional[pos]) {
      std::int64_t v = assign_current ? eval(*solver.functional[pos], work, {})
                                      : eval(*solver.functional[pos], fixed, work);
      if (auto idx = value_index(var, v)) try_value(*idx);
    } else {
      for (std::size_t idx = 0; idx < vars_[var].values.size(); ++idx) try_value(static_cast<std::int32_t>(idx));
    }
  };
  assign(0);
}

std::vector<State> TypedModel::initial_states() const {
  std::vector<State> out;
  solve(init_solver_, {}, true, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<State> TypedModel::successors(StateView s) const {
  std::vector<State> out;
  solve(trans_solver_, s, false, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool TypedModel::is_initial(StateView s) const {
  if (s.size() != vars_.size()) return false;
  return std::all_of(init_checks_.begin(), init_checks_.end(), [&](const Program& p) { return holds(p, s, {}); });
}

bool TypedModel::is_transition(StateView s, StateView t) const {
  if (s.size() != vars_.size() || t.size() != vars_.size()) return false;
  return std::all_of(trans_checks_.begin(), trans_checks_.end(), [&](const Program& p) { return holds(p, s, t); });
}

std::string TypedModel::value_name(std::size_t var, std::int32_t index) const {
  const VarInfo& v = vars_[var];
  std::int64_t value = v.values[index];
  switch (v.value_type) {
    case ValueType::boolean:
      return value ? "TRUE" : "FALSE";
    case ValueType::integer:
      return std::to_string(value);
    case ValueType::enumeration:
      return literals_[value];
  }
  return {};
}

std::string TypedModel::format_state(StateView s) const {
  std::string out;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (i) out += ", ";
    out += vars_[i].name + "=" + value_name(i, s[i]);
  }
  return out;
}

}  // namespace safetk::sts
