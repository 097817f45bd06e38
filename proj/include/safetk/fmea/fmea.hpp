#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safetk/analysis/mcs.hpp"

namespace safetk::fmea {

struct Property {
  std::string label;
  sts::Expr expr;
  bool operator==(const Property& o) const;
};

struct FmeaRow {
  analysis::CutSet faults;
  std::optional<analysis::Order> ordering;  // dynamic tables only
  std::vector<std::string> violated;        // property labels, table order
  std::vector<std::string> minimal_for;     // subset of `violated`
  bool operator==(const FmeaRow&) const = default;
};

struct FmeaTable {
  std::vector<Property> properties;
  std::vector<FmeaRow> rows;  // by cardinality, then faults, then ordering
  std::size_t max_card = 0;
  std::optional<std::size_t> step_bound;
  bool dynamic = false;
  bool complete = true;
  bool operator==(const FmeaTable&) const = default;
};

/// One row per fault set that is a minimal cut set of some property. A row
/// lists every property the set can violate when only its faults may occur.
FmeaTable generate_fmea(const fault::ExtendedModel& xm, const std::vector<Property>& properties,
                        const analysis::AnalysisOptions& opt);

/// One row per (fault set, admissible order). A property is listed when the
/// faults occurring in that order can violate it.
FmeaTable generate_dynamic_fmea(const fault::ExtendedModel& xm, const std::vector<Property>& properties,
                                const analysis::AnalysisOptions& opt);

enum class FmeaFormat { xml, tsv };

std::string export_fmea(const FmeaTable& table, FmeaFormat format);
FmeaTable import_fmea_xml(std::string_view xml);

/// Reads `label: expression;` entries. Throws InputError on duplicates.
std::vector<Property> parse_properties(std::string_view text);

}  // namespace safetk::fmea
