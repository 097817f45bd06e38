#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "safetk/sts/model.hpp"

namespace safetk::sts {

/// A state assigns each variable (declaration order) the index of its value
/// inside the variable's domain: booleans false=0/true=1, ranges lo..hi as
/// 0..hi-lo, enumerations by literal position.
using State = std::vector<std::int32_t>;
using StateView = std::span<const std::int32_t>;
using Trace = std::vector<State>;

enum class ValueType { boolean, integer, enumeration };

/// Straight-line evaluation program for one compiled expression.
struct Program {
  enum class Code : std::uint8_t {
    constant,
    var_cur,
    var_next,
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
    in,
    min,
    max,
  };
  struct Node {
    Code code = Code::constant;
    std::int64_t value = 0;      // constant value, or variable index
    std::uint32_t first_kid = 0;  // into `kids`
    std::uint32_t num_kids = 0;
  };
  std::vector<Node> nodes;
  std::vector<std::uint32_t> kids;
  std::uint32_t root = 0;
  ValueType type = ValueType::boolean;
  std::vector<std::uint32_t> cur_vars;   // variables read in the current frame
  std::vector<std::uint32_t> next_vars;  // variables read in the next frame
};

struct VarInfo {
  std::string name;
  TypeSpec type;
  ValueType value_type = ValueType::boolean;
  std::vector<std::int64_t> values;  // domain index -> semantic value
};

struct StateCap {
  std::size_t max_states = 10'000'000;
};

/// A type-checked model with its constraints compiled for explicit-state
/// exploration. Immutable after construction and safe to share.
class TypedModel {
 public:
  /// Type-checks `m`; throws InputError carrying every diagnostic found.
  explicit TypedModel(SymbolicModel m);

  const SymbolicModel& source() const { return source_; }
  std::size_t num_vars() const { return vars_.size(); }
  const VarInfo& var(std::size_t i) const { return vars_[i]; }
  std::optional<std::size_t> var_index(std::string_view name) const;

  /// Compiles a boolean predicate over the current state (no `next`).
  Program compile_state_predicate(const Expr& e) const;
  /// Compiles a boolean predicate over a transition (`next` allowed).
  Program compile_transition_predicate(const Expr& e) const;
  /// Type of `e` under this model's symbol table (current-state context).
  ValueType type_of(const Expr& e) const;

  std::int64_t eval(const Program& p, StateView cur, StateView next = {}) const;
  bool holds(const Program& p, StateView cur, StateView next = {}) const {
    return eval(p, cur, next) != 0;
  }

  std::vector<State> initial_states() const;
  /// Successors in lexicographic (declaration order, value order) order.
  std::vector<State> successors(StateView s) const;
  bool is_initial(StateView s) const;
  bool is_transition(StateView s, StateView t) const;

  std::string value_name(std::size_t var, std::int32_t index) const;
  std::string format_state(StateView s) const;
  std::optional<std::int32_t> value_index(std::size_t var, std::int64_t semantic) const;

  /// TRANS and shifted INVAR conjuncts, as checked on every transition.
  const std::vector<Program>& transition_constraints() const { return trans_checks_; }

  std::int64_t literal_id(std::string_view lit) const;
  const std::string& literal_name(std::int64_t id) const { return literals_[id]; }

  struct Constraint {
    Program program;
    std::uint32_t check_at = 0;  // position in the assignment order after which it is decidable
    bool ground = false;         // reads no to-be-assigned variable
  };
  struct Solver {
    std::vector<std::uint32_t> order;               // assignment order over variables
    std::vector<std::optional<Program>> functional;  // per order position
    std::vector<Constraint> constraints;
  };

 private:
  void build();
  Solver make_solver(std::vector<Program> constraints, bool assign_current) const;
  void solve(const Solver& solver, StateView fixed, bool assign_current,
             std::vector<State>& out) const;

  SymbolicModel source_;
  std::vector<VarInfo> vars_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::vector<std::string> literals_;
  std::unordered_map<std::string, std::int64_t> literal_ids_;
  Solver init_solver_;
  Solver trans_solver_;
  std::vector<Program> init_checks_;
  std::vector<Program> trans_checks_;
  friend class Compiler;
};

}  // namespace safetk::sts
