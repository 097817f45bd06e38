#include <algorithm>
#include <set>

#include "safetk/sts/model.hpp"

namespace safetk::sts {

namespace {

bool is_section_keyword(const TokenCursor& cur) {
  for (const char* kw : {"MODULE", "VAR", "DEFINE", "INIT", "TRANS", "INVAR"}) {
    if (cur.is_word(kw)) return true;
  }
  return false;
}

bool is_reserved(std::string_view w) {
  static const std::set<std::string_view> kReserved = {
      "MODULE", "VAR", "DEFINE", "INIT", "TRANS", "INVAR", "TRUE", "FALSE", "true", "false", "next",
      "case",   "esac", "in",    "min",  "max",   "boolean"};
  return kReserved.count(w) > 0;
}

// Precedence climbing, lowest first:
//   ?:  <->  ->  |  &  comparisons/in  + -  *  unary
class ExprParser {
 public:
  explicit ExprParser(TokenCursor& cur) : cur_(cur) {}

  Expr parse() { return ternary(); }

 private:
  Expr ternary() {
    Expr c = iff();
    if (cur_.is_punct("?")) {
      SourcePos p = cur_.next().pos;
      Expr t = ternary();
      cur_.expect_punct(":");
      Expr e = ternary();
      return Expr::make(Op::ite, {c, t, e}, p);
    }
    return c;
  }

  Expr iff() {
    Expr lhs = implication();
    while (cur_.is_punct("<->")) {
      SourcePos p = cur_.next().pos;
      lhs = Expr::make(Op::iff, {lhs, implication()}, p);
    }
    return lhs;
  }

  Expr implication() {
    Expr lhs = disjunction();
    if (cur_.is_punct("->")) {
      SourcePos p = cur_.next().pos;
      return Expr::make(Op::implies, {lhs, implication()}, p);
    }
    return lhs;
  }

  Expr disjunction() {
    Expr lhs = conjunction();
    while (cur_.is_punct("|")) {
      SourcePos p = cur_.next().pos;
      lhs = Expr::make(Op::or_, {lhs, conjunction()}, p);
    }
    return lhs;
  }

  Expr conjunction() {
    Expr lhs = comparison();
    while (cur_.is_punct("&")) {
      SourcePos p = cur_.next().pos;
      lhs = Expr::make(Op::and_, {lhs, comparison()}, p);
    }
    return lhs;
  }

  Expr comparison() {
    Expr lhs = additive();
    static const std::pair<const char*, Op> kOps[] = {{"=", Op::eq},  {"!=", Op::ne}, {"<", Op::lt},
                                                      {"<=", Op::le}, {">", Op::gt},  {">=", Op::ge}};
    for (const auto& [tok, op] : kOps) {
      if (cur_.is_punct(tok)) {
        SourcePos p = cur_.next().pos;
        return Expr::make(op, {lhs, additive()}, p);
      }
    }
    if (cur_.is_word("in")) {
      SourcePos p = cur_.next().pos;
      std::vector<Expr> args{lhs};
      cur_.expect_punct("{");
      do {
        args.push_back(additive());
      } while (cur_.accept_punct(","));
      cur_.expect_punct("}");
      return Expr::make(Op::in, std::move(args), p);
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (cur_.is_punct("+") || cur_.is_punct("-")) {
      const Token& t = cur_.next();
      Op op = t.text == "+" ? Op::add : Op::sub;
      lhs = Expr::make(op, {lhs, multiplicative()}, t.pos);
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (cur_.is_punct("*")) {
      SourcePos p = cur_.next().pos;
      lhs = Expr::make(Op::mul, {lhs, unary()}, p);
    }
    return lhs;
  }

  Expr unary() {
    if (cur_.is_punct("!")) {
      SourcePos p = cur_.next().pos;
      return Expr::make(Op::not_, {unary()}, p);
    }
    if (cur_.is_punct("-")) {
      SourcePos p = cur_.peek().pos;
      if (cur_.peek(1).kind == Token::Kind::integer) {
        return Expr::integer(cur_.expect_integer(), p);
      }
      cur_.next();
      return Expr::make(Op::neg, {unary()}, p);
    }
    return primary();
  }

  Expr primary() {
    const Token& t = cur_.peek();
    SourcePos p = t.pos;
    if (cur_.accept_punct("(")) {
      Expr e = parse();
      cur_.expect_punct(")");
      return e;
    }
    if (t.kind == Token::Kind::integer) return Expr::integer(cur_.expect_integer(), p);
    if (t.kind != Token::Kind::identifier) cur_.fail_expected("expression");
    if (cur_.accept_word("TRUE") || cur_.accept_word("true")) return Expr::boolean(true, p);
    if (cur_.accept_word("FALSE") || cur_.accept_word("false")) return Expr::boolean(false, p);
    if (cur_.accept_word("next")) {
      cur_.expect_punct("(");
      Expr e = parse();
      cur_.expect_punct(")");
      return Expr::make(Op::next, {e}, p);
    }
    if (cur_.is_word("min") || cur_.is_word("max")) {
      Op op = cur_.next().text == "min" ? Op::min : Op::max;
      cur_.expect_punct("(");
      Expr a = parse();
      cur_.expect_punct(",");
      Expr b = parse();
      cur_.expect_punct(")");
      return Expr::make(op, {a, b}, p);
    }
    if (cur_.accept_word("case")) return case_expr(p);
    if (is_reserved(t.text)) cur_.fail_expected("expression");
    return Expr::ident(cur_.next().text, p);
  }

  Expr case_expr(SourcePos p) {
    std::vector<std::pair<Expr, Expr>> branches;
    while (!cur_.is_word("esac")) {
      Expr c = parse();
      cur_.expect_punct(":");
      Expr v = parse();
      cur_.expect_punct(";");
      branches.emplace_back(std::move(c), std::move(v));
    }
    cur_.expect_word("esac");
    if (branches.empty()) throw InputError(p, "empty case expression");
    const Expr& last_cond = branches.back().first;
    if (!(last_cond.op() == Op::bool_const && last_cond.bool_value())) {
      throw InputError(p, "case expression needs a final 'TRUE :' branch");
    }
    Expr acc = branches.back().second;
    for (std::size_t i = branches.size() - 1; i-- > 0;) {
      acc = Expr::make(Op::ite, {branches[i].first, branches[i].second, acc}, p);
    }
    return acc;
  }

  TokenCursor& cur_;
};

TypeSpec parse_type(TokenCursor& cur) {
  if (cur.accept_word("boolean")) return TypeSpec::boolean();
  if (cur.accept_punct("{")) {
    std::vector<std::string> lits;
    do {
      SourcePos p = cur.peek().pos;
      std::string lit = cur.expect_identifier("enumeration literal");
      if (is_reserved(lit)) throw InputError(p, "reserved word used as literal: " + lit);
      if (std::find(lits.begin(), lits.end(), lit) != lits.end()) {
        throw InputError(p, "duplicate enumeration literal: " + lit);
      }
      lits.push_back(std::move(lit));
    } while (cur.accept_punct(","));
    cur.expect_punct("}");
    return TypeSpec::enumeration(std::move(lits));
  }
  SourcePos p = cur.peek().pos;
  std::int64_t lo = cur.expect_integer();
  cur.expect_punct("..");
  std::int64_t hi = cur.expect_integer();
  if (lo > hi) throw InputError(p, "empty range " + std::to_string(lo) + ".." + std::to_string(hi));
  return TypeSpec::range(lo, hi);
}

void check_idents(const Expr& x, const std::set<std::string>& names,
                  const std::set<std::string>& lits, std::vector<Diagnostic>& diags) {
  if (x.op() == Op::ident) {
    if (!names.count(x.name()) && !lits.count(x.name())) {
      diags.push_back({x.pos(), Severity::error, "unknown identifier: " + x.name()});
    }
    return;
  }
  for (const Expr& a : x.args()) check_idents(a, names, lits, diags);
}

void check_names(const SymbolicModel& m) {
  std::vector<Diagnostic> diags;
  std::set<std::string> seen;
  std::set<std::string> literals;
  for (const VarDecl& v : m.vars) {
    if (!seen.insert(v.name).second) {
      diags.push_back({v.pos, Severity::error, "duplicate declaration: " + v.name});
    }
    for (const std::string& l : v.type.literals) literals.insert(l);
  }
  for (const DefineDecl& d : m.defines) {
    if (!seen.insert(d.name).second) {
      diags.push_back({d.pos, Severity::error, "duplicate declaration: " + d.name});
    }
  }
  auto check_expr = [&](const Expr& e) { check_idents(e, seen, literals, diags); };
  for (const DefineDecl& d : m.defines) check_expr(d.body);
  for (const auto* section : {&m.init, &m.trans, &m.invar}) {
    for (const Expr& e : *section) check_expr(e);
  }
  if (!diags.empty()) throw InputError(std::move(diags));
}

}  // namespace

TypeSpec TypeSpec::enumeration(std::vector<std::string> lits) {
  TypeSpec t;
  t.kind = Kind::enumeration;
  t.literals = std::move(lits);
  return t;
}

TypeSpec TypeSpec::range(std::int64_t lo, std::int64_t hi) {
  TypeSpec t;
  t.kind = Kind::range;
  t.lo = lo;
  t.hi = hi;
  return t;
}

std::size_t TypeSpec::cardinality() const {
  switch (kind) {
    case Kind::boolean:
      return 2;
    case Kind::enumeration:
      return literals.size();
    case Kind::range:
      return static_cast<std::size_t>(hi - lo + 1);
  }
  return 0;
}

const VarDecl* SymbolicModel::find_var(std::string_view n) const {
  for (const VarDecl& v : vars) {
    if (v.name == n) return &v;
  }
  return nullptr;
}

const DefineDecl* SymbolicModel::find_define(std::string_view n) const {
  for (const DefineDecl& d : defines) {
    if (d.name == n) return &d;
  }
  return nullptr;
}

Expr parse_expr(TokenCursor& cur) { return ExprParser(cur).parse(); }

Expr parse_expr(std::string_view text) {
  TokenCursor cur(text);
  Expr e = parse_expr(cur);
  if (!cur.at_end()) cur.fail_expected("end of expression");
  return e;
}

SymbolicModel parse_model(std::string_view text) {
  TokenCursor cur(text);
  SymbolicModel m;
  cur.expect_word("MODULE");
  m.name = cur.expect_identifier("module name");
  while (!cur.at_end()) {
    if (cur.accept_word("VAR")) {
      while (!cur.at_end() && !is_section_keyword(cur)) {
        VarDecl v;
        v.pos = cur.peek().pos;
        v.name = cur.expect_identifier("variable name");
        if (is_reserved(v.name)) throw InputError(v.pos, "reserved word used as name: " + v.name);
        cur.expect_punct(":");
        v.type = parse_type(cur);
        cur.expect_punct(";");
        m.vars.push_back(std::move(v));
      }
    } else if (cur.accept_word("DEFINE")) {
      while (!cur.at_end() && !is_section_keyword(cur)) {
        DefineDecl d;
        d.pos = cur.peek().pos;
        d.name = cur.expect_identifier("define name");
        if (is_reserved(d.name)) throw InputError(d.pos, "reserved word used as name: " + d.name);
        cur.expect_punct(":=");
        d.body = parse_expr(cur);
        cur.expect_punct(";");
        m.defines.push_back(std::move(d));
      }
    } else if (cur.is_word("INIT") || cur.is_word("TRANS") || cur.is_word("INVAR")) {
      std::string section = cur.next().text;
      auto& target = section == "INIT" ? m.init : section == "TRANS" ? m.trans : m.invar;
      do {
        target.push_back(parse_expr(cur));
        cur.expect_punct(";");
      } while (!cur.at_end() && !is_section_keyword(cur));
    } else if (cur.is_word("MODULE")) {
      cur.fail("only one MODULE per file is supported");
    } else {
      cur.fail_expected("VAR, DEFINE, INIT, TRANS or INVAR");
    }
  }
  check_names(m);
  return m;
}

}  // namespace safetk::sts
