#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safetk/lexer.hpp"
#include "safetk/sts/expr.hpp"

namespace safetk::sts {

struct TypeSpec {
  enum class Kind { boolean, enumeration, range };
  Kind kind = Kind::boolean;
  std::vector<std::string> literals;  // enumeration only, declaration order
  std::int64_t lo = 0;                // range only
  std::int64_t hi = 0;

  static TypeSpec boolean() { return {}; }
  static TypeSpec enumeration(std::vector<std::string> lits);
  static TypeSpec range(std::int64_t lo, std::int64_t hi);

  std::size_t cardinality() const;
  friend bool operator==(const TypeSpec&, const TypeSpec&) = default;
};

struct VarDecl {
  std::string name;
  TypeSpec type;
  SourcePos pos;
  friend bool operator==(const VarDecl& a, const VarDecl& b) {
    return a.name == b.name && a.type == b.type;
  }
};

struct DefineDecl {
  std::string name;
  Expr body;
  SourcePos pos;
  friend bool operator==(const DefineDecl& a, const DefineDecl& b) {
    return a.name == b.name && a.body == b.body;
  }
};

/// A flat finite-state synchronous transition system as written in a `.smx`
/// file. Constraints are kept as written; see `TypedModel` for the checked form.
struct SymbolicModel {
  std::string name;
  std::vector<VarDecl> vars;
  std::vector<DefineDecl> defines;
  std::vector<Expr> init;
  std::vector<Expr> trans;
  std::vector<Expr> invar;

  const VarDecl* find_var(std::string_view n) const;
  const DefineDecl* find_define(std::string_view n) const;
  bool declares(std::string_view n) const { return find_var(n) || find_define(n); }

  friend bool operator==(const SymbolicModel&, const SymbolicModel&) = default;
};

SymbolicModel parse_model(std::string_view text);

/// Parses a single expression; the whole input must be consumed.
Expr parse_expr(std::string_view text);

/// Expression parser over an existing token cursor, for the other input
/// languages that embed model expressions.
Expr parse_expr(TokenCursor& cur);

std::string to_string(const Expr& e);
std::string to_string(const TypeSpec& t);
std::string print_model(const SymbolicModel& m);

}  // namespace safetk::sts
