#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "safetk/analysis/mcs.hpp"
#include "safetk/cca/cca.hpp"

namespace safetk::ft {

enum class NodeKind { basic, and_, or_, pand };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::or_;
  std::vector<std::string> children;  // gates only; PAND in priority order
  std::string event;                  // basic events only
  std::optional<double> probability;  // basic events only
  std::string label;
  bool operator==(const Node&) const = default;
};

/// Gate DAG; nodes are kept in creation order with the root first.
struct FaultTree {
  std::string root;
  std::vector<Node> nodes;

  const Node* find(std::string_view id) const;
  std::vector<std::string> basic_events() const;  // sorted
  bool operator==(const FaultTree&) const = default;
};

/// Two-level tree: an OR root over one child per cut set. Probabilities are
/// copied from the event registry. Throws InputError if `sequences` do not
/// match `result`.
FaultTree build_fault_tree(const analysis::CutSetResult& result, const std::vector<analysis::CutSequence>* sequences,
                           const fault::ExtendedModel& xm, const std::string& tle_label);

/// Event name -> probability, plus the groups of dependent events.
struct ProbabilityAssignment {
  std::map<std::string, double> p;
  std::vector<cca::DependencyGroup> groups;
};

ProbabilityAssignment assignment_from(const fault::ExtendedModel& xm, const std::vector<cca::CommonCauseSpec>& specs);

/// Exact probability of every node. PAND gates evaluate as AND. Members of a
/// dependency group behave as `member | cause` with the cause independent.
std::map<std::string, double> evaluate_probability(const FaultTree& ft, const ProbabilityAssignment& pa);

/// Sum over cut sets of the product of member probabilities.
double rare_event_approximation(const FaultTree& ft, const ProbabilityAssignment& pa);

/// Hash-consed polynomial expression over probability symbols.
class ProbabilityExpr {
 public:
  enum class Kind { constant, symbol, add, sub, mul };
  struct Node {
    Kind kind;
    double value = 0;
    std::string symbol;
    int lhs = -1;
    int rhs = -1;
  };

  int constant(double v);
  int symbol(const std::string& name);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);

  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }
  int root() const { return root_; }
  void set_root(int r) { root_ = r; }

  double evaluate(const std::map<std::string, double>& values) const;
  std::vector<std::string> symbols() const;  // sorted
  std::string to_string() const;

 private:
  int intern(Node n);
  std::vector<Node> nodes_;
  std::map<std::tuple<int, double, std::string, int, int>, int> index_;
  int root_ = -1;
};

/// Shannon expansion of the root over the basic events in sorted order,
/// with dependency groups folded in as extra symbols.
ProbabilityExpr symbolic_probability(const FaultTree& ft, const std::vector<cca::DependencyGroup>& groups = {});

enum class ScriptDialect { python, octave };

/// Self-contained script defining `tle_probability(p_...)`.
std::string render_prob_script(const ProbabilityExpr& expr, ScriptDialect dialect);

/// Identifier used for an event's probability argument in scripts.
std::string probability_symbol(const std::string& event);

enum class ExportFormat { xml, tsv, dot };

std::string export_ft(const FaultTree& ft, ExportFormat format,
                      const std::map<std::string, double>* probabilities = nullptr);
FaultTree import_ft_xml(std::string_view xml);

std::string kind_name(NodeKind k);

}  // namespace safetk::ft
