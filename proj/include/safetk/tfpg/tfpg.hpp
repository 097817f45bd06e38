#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safetk/fault/extension.hpp"
#include "safetk/sts/typed_model.hpp"

namespace safetk::tfpg {

enum class NodeKind { failure, or_node, and_node };

std::string_view kind_name(NodeKind k);

struct Edge {
  std::string src;
  std::string dst;
  std::int64_t tmin = 0;
  std::optional<std::int64_t> tmax;               // nullopt: unbounded
  std::optional<std::vector<std::string>> modes;  // nullopt: every mode; otherwise sorted
  bool operator==(const Edge&) const = default;
};

/// Nodes are keyed by id; edges are kept sorted by (src, dst), one per pair.
struct Tfpg {
  std::string name;
  std::vector<std::string> modes;  // sorted
  std::map<std::string, NodeKind> nodes;
  std::vector<Edge> edges;

  const Edge* find_edge(std::string_view src, std::string_view dst) const;
  std::vector<const Edge*> incoming(std::string_view dst) const;
  /// Sorts modes and edges, then checks every structural rule; throws InputError.
  void normalize();
  bool operator==(const Tfpg&) const = default;
};

Tfpg parse_tfpg(std::string_view text);
std::string write_tfpg(const Tfpg& g);
std::string tfpg_to_xml(const Tfpg& g);
Tfpg tfpg_from_xml(std::string_view xml);
std::string tfpg_to_dot(const Tfpg& g);

/// First-activation step per node (absent: never) and the active mode per
/// step. The trace length is `mode.size()`.
struct ActivationTrace {
  std::map<std::string, std::size_t> activated;
  std::vector<std::string> mode;
  bool operator==(const ActivationTrace&) const = default;
};

enum class Reason { too_early, too_late, missing_cause, and_incomplete, mode_violation };

std::string_view reason_name(Reason r);

struct Inconsistency {
  std::string node;
  std::size_t step = 0;
  Reason reason = Reason::missing_cause;
  bool operator==(const Inconsistency&) const = default;
};

/// nullopt when some choice of edge firing times reproduces `at`; otherwise
/// the first inconsistency, ordered by node rank in the graph's
/// condensation, then step, then id.
std::optional<Inconsistency> admits(const Tfpg& g, const ActivationTrace& at);

struct NodeBinding {
  struct Node {
    std::string id;
    NodeKind kind = NodeKind::or_node;
    sts::Expr predicate;  // discrepancies
    std::string event;    // failures: the fault event whose occurrence activates the node
    bool operator==(const Node&) const;
  };
  std::vector<std::pair<std::string, sts::Expr>> modes;
  std::vector<Node> nodes;
};

/// Parses a .bind file:
///   mode P : m = P;
///   failure G1_Off;            (event of the same name)
///   failure Gen1 : G1_Off;     (named event)
///   discrepancy G1_DEAD or : !g1;
NodeBinding parse_binding(std::string_view text);
std::string write_binding(const NodeBinding& b);

/// A binding compiled against an extended model.
class BoundModel {
 public:
  BoundModel(const fault::ExtendedModel& xm, const NodeBinding& binding);

  const sts::TypedModel& model() const { return model_; }
  std::size_t num_nodes() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  NodeKind kind(std::size_t i) const { return kinds_[i]; }
  std::optional<std::size_t> index(std::string_view id) const;
  const sts::Program& predicate(std::size_t i) const { return predicates_[i]; }
  const std::vector<std::string>& mode_names() const { return mode_names_; }

  /// Bit i set when node i's predicate holds in `s`.
  std::uint64_t truth(sts::StateView s) const;
  /// Index into mode_names(); throws InputError unless exactly one mode holds.
  std::size_t mode(sts::StateView s) const;
  ActivationTrace activation_trace(const sts::Trace& trace) const;
  /// Checks that the binding covers exactly the nodes and modes of `g`, with matching kinds.
  void check_against(const Tfpg& g) const;

 private:
  sts::TypedModel model_;
  std::vector<std::string> ids_;  // sorted
  std::vector<NodeKind> kinds_;
  std::vector<sts::Program> predicates_;
  std::vector<std::string> mode_names_;  // sorted
  std::vector<sts::Program> mode_predicates_;
};

struct Counterexample {
  sts::Trace trace;
  Inconsistency first;
};

struct ValidationReport {
  bool complete = true;
  std::vector<Counterexample> counterexamples;  // shortest first, then lexicographic
  std::size_t explored = 0;                     // product states visited
};

struct ValidationOptions {
  std::size_t step_bound = 20;
  std::size_t max_counterexamples = 1;
  sts::StateCap cap;
};

/// Checks every model trace of at most `step_bound` transitions against `g`.
ValidationReport validate_behavioral(const Tfpg& g, const NodeBinding& binding, const fault::ExtendedModel& xm,
                                     const ValidationOptions& opt);

/// Proposes an edge structure from the model's behaviour: bounds [0, inf),
/// edge modes from the activation witnesses, kinds from the binding.
Tfpg synthesize_structure(const fault::ExtendedModel& xm, const NodeBinding& binding, std::size_t step_bound,
                          std::string name = "synthesized", sts::StateCap cap = {});

}  // namespace safetk::tfpg
