#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safetk/fault/extension.hpp"
#include "safetk/sts/explore.hpp"

namespace safetk::analysis {

/// Event names, sorted.
using CutSet = std::vector<std::string>;

struct CutSetResult {
  sts::Expr tle;
  std::vector<CutSet> mcs;  // by cardinality, then lexicographic
  std::size_t max_card = 0;
  std::optional<std::size_t> step_bound;
  bool complete = false;
  /// The TLE is reachable with no fault at all; `mcs` is then {{}}.
  bool nominal_reachable = false;
};

/// A total order of first occurrences. Events that first occur at the same
/// step are admitted in every relative order.
using Order = std::vector<std::string>;

struct CutSequence {
  CutSet base;
  std::vector<Order> orders;  // sorted
};

struct AnalysisOptions {
  std::size_t max_card = 64;
  std::optional<std::size_t> step_bound;
  sts::StateCap cap;
};

/// The extended model with every event outside `allowed` disabled.
sts::SymbolicModel restrict_model(const fault::ExtendedModel& xm, const std::vector<std::string>& allowed);

/// Minimal cut sets by label propagation over the explicit state graph.
/// At most 64 events are supported.
CutSetResult compute_mcs(const fault::ExtendedModel& xm, const sts::Expr& tle, const AnalysisOptions& opt);

/// Reference oracle: one reachability check per event subset.
CutSetResult brute_force_mcs(const fault::ExtendedModel& xm, const sts::Expr& tle, const AnalysisOptions& opt);

std::vector<CutSequence> compute_cut_sequences(const fault::ExtendedModel& xm, const sts::Expr& tle,
                                               const CutSetResult& result, const AnalysisOptions& opt);

/// Shortest trace reaching `tle` when only the events of `cut` may occur.
std::optional<sts::Trace> witness(const fault::ExtendedModel& xm, const sts::Expr& tle, const CutSet& cut,
                                  const AnalysisOptions& opt);

/// Shortest trace reaching `tle` with only the events of `order` occurring,
/// first occurrences in that order (ties allowed).
std::optional<sts::Trace> order_witness(const fault::ExtendedModel& xm, const sts::Expr& tle, const Order& order,
                                        const AnalysisOptions& opt);

/// Sorts by cardinality then lexicographically and drops non-minimal sets.
std::vector<CutSet> minimize(std::vector<CutSet> sets);

/// One cut set per line, events tab-separated.
std::string format_mcs_tsv(const CutSetResult& r);
std::string format_mcs_xml(const CutSetResult& r);

}  // namespace safetk::analysis
