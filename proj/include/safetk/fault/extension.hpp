#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safetk/sts/model.hpp"
#include "safetk/sts/typed_model.hpp"

namespace safetk::fault {

using sts::Expr;

enum class ParamKind { value, expression, condition };

/// Which target types a template may be applied to.
struct Applicability {
  bool boolean = false;
  bool integer = false;
  bool enumeration = false;
  static Applicability any() { return {true, true, true}; }
  bool accepts(sts::ValueType t) const;
  bool operator==(const Applicability&) const = default;
};

struct FaultTemplate {
  std::string name;
  std::vector<std::pair<std::string, ParamKind>> params;
  Applicability applies;
  /// Effect over the reserved symbol `nominal` and the parameters. Empty for
  /// the built-ins whose effect needs auxiliary state (random, ramp_down).
  Expr effect;
  bool builtin = false;
};

/// Constraint over `mode` and `next(mode)`, literals `nominal` / `faulty`.
struct DynamicsTemplate {
  std::string name;
  Expr constraint;
  bool builtin = false;
};

class FaultLibrary {
 public:
  /// The five built-in effect templates and three built-in dynamics.
  FaultLibrary();

  const std::vector<FaultTemplate>& templates() const { return templates_; }
  const std::vector<DynamicsTemplate>& dynamics() const { return dynamics_; }
  const FaultTemplate* find_template(std::string_view name) const;
  const DynamicsTemplate* find_dynamics(std::string_view name) const;

  /// Adds user definitions; throws InputError on clashes or ill-typed bodies.
  void add(FaultTemplate t, SourcePos pos = {});
  void add(DynamicsTemplate d, SourcePos pos = {});

 private:
  std::vector<FaultTemplate> templates_;
  std::vector<DynamicsTemplate> dynamics_;
};

/// Built-ins plus the user definitions in `text` (.flib).
FaultLibrary load_fault_library(std::string_view text);

struct Instruction {
  std::string event;
  std::string target;
  std::string template_name;
  std::vector<Expr> args;
  std::string dynamics;
  double probability = 0.0;
  SourcePos pos;
};

/// Parses a .fei file; names are resolved later by extend_model.
std::vector<Instruction> parse_fei(std::string_view text);

enum class EventKind { fault, common_cause };

/// How a restricted analysis forbids an event: a constraint added to INVAR
/// or to TRANS.
struct DisableConstraint {
  enum class Section { invar, trans };
  Section section = Section::invar;
  Expr expr;
};

struct EventInfo {
  std::string name;
  EventKind kind = EventKind::fault;
  std::string variable;  // mode variable, or the latch of a common cause
  Expr occurrence;       // holds in every state where the event has occurred
  double probability = 0.0;
  DisableConstraint disable;
  std::vector<std::string> members;  // common causes only
};

struct ExtendedModel {
  sts::SymbolicModel model;
  std::vector<EventInfo> events;

  const EventInfo* find_event(std::string_view name) const;
  std::vector<std::string> event_names() const;
};

/// An extended model with no events: the nominal model itself.
ExtendedModel identity_extension(const sts::SymbolicModel& nominal);

/// Applies `instructions` in order; throws InputError with one diagnostic per
/// unresolvable instruction.
ExtendedModel extend_model(const sts::TypedModel& nominal, const FaultLibrary& library,
                           const std::vector<Instruction>& instructions);

/// Tab-separated registry, one event per line:
/// name, kind, variable, probability, occurrence.
std::string format_registry(const ExtendedModel& xm);

}  // namespace safetk::fault
