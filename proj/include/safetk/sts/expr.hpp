#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "safetk/diagnostics.hpp"

namespace safetk::sts {

enum class Op {
  bool_const,
  int_const,
  ident,  // variable, define, or enumeration literal; resolved by the type checker
  next,
  not_,
  neg,
  and_,
  or_,
  implies,
  iff,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  add,
  sub,
  mul,
  ite,
  in,  // args[0] in {args[1], ...}
  min,
  max,
};

struct ExprNode;

/// Immutable expression tree with shared structure. Copying an Expr is cheap.
class Expr {
 public:
  Expr() = default;

  static Expr boolean(bool v, SourcePos pos = {});
  static Expr integer(std::int64_t v, SourcePos pos = {});
  static Expr ident(std::string name, SourcePos pos = {});
  static Expr make(Op op, std::vector<Expr> args, SourcePos pos = {});

  bool valid() const { return node_ != nullptr; }
  Op op() const;
  bool bool_value() const;
  std::int64_t int_value() const;
  const std::string& name() const;
  const std::vector<Expr>& args() const;
  const Expr& arg(std::size_t i) const { return args()[i]; }
  SourcePos pos() const;
  bool same_node(const Expr& o) const { return node_ == o.node_; }

  /// Structural equality; source positions are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Op op = Op::bool_const;
  bool bval = false;
  std::int64_t ival = 0;
  std::string name;
  std::vector<Expr> args;
  SourcePos pos;
};

// Convenience builders used by the model transformations.
Expr operator!(const Expr& e);
Expr operator&(const Expr& a, const Expr& b);
Expr operator|(const Expr& a, const Expr& b);
Expr implies(const Expr& a, const Expr& b);
Expr eq(const Expr& a, const Expr& b);
Expr ite(const Expr& c, const Expr& t, const Expr& e);
Expr next(const Expr& e);

/// Conjunction of a list; TRUE for an empty list.
Expr conjoin(const std::vector<Expr>& parts);

/// Splits nested top-level conjunctions into their conjuncts.
void flatten_conjuncts(const Expr& e, std::vector<Expr>& out);

/// Renames identifiers by `rename(name)`; identifiers for which it returns the
/// input unchanged are kept.
template <typename F>
Expr rename_idents(const Expr& e, F&& rename);

/// Replaces each identifier for which `lookup` returns a valid Expr.
template <typename F>
Expr substitute(const Expr& e, F&& lookup);

/// Collects identifier names occurring in `e` (duplicates removed, first-seen order).
std::vector<std::string> identifiers(const Expr& e);

// ---------------------------------------------------------------------------

template <typename F>
Expr substitute(const Expr& e, F&& lookup) {
  if (e.op() == Op::ident) {
    Expr r = lookup(e.name());
    return r.valid() ? r : e;
  }
  if (e.args().empty()) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  bool changed = false;
  for (const Expr& a : e.args()) {
    args.push_back(substitute(a, lookup));
    changed = changed || !args.back().same_node(a);
  }
  if (!changed) return e;
  return Expr::make(e.op(), std::move(args), e.pos());
}

template <typename F>
Expr rename_idents(const Expr& e, F&& rename) {
  return substitute(e, [&](const std::string& n) -> Expr {
    std::string r = rename(n);
    if (r == n) return Expr();
    return Expr::ident(std::move(r));
  });
}

}  // namespace safetk::sts
