#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "safetk/fault/extension.hpp"

namespace safetk::cca {

/// Steps after the common cause at which a member may (lo) and must (hi) occur.
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool operator==(const Window&) const = default;
};

struct CommonCauseSpec {
  std::string id;
  std::vector<std::string> members;
  bool cascading = false;
  std::map<std::string, Window> windows;  // cascading only; absent members use [0,0]
  double probability = 0.0;
  SourcePos pos;

  Window window(const std::string& member) const;
};

/// Parses a .cca file; member names are resolved by apply_cca.
std::vector<CommonCauseSpec> parse_cca(std::string_view text);

/// Adds one latched cause variable per common cause and ties its members to it.
/// The result registers every cause as an event named by its id.
fault::ExtendedModel apply_cca(const fault::ExtendedModel& xm, const std::vector<CommonCauseSpec>& specs);

/// Events that are not independent of each other: each member behaves as
/// `member | cause` for probability evaluation.
struct DependencyGroup {
  std::string cause;
  std::vector<std::string> members;
  double probability = 0.0;
};

std::vector<DependencyGroup> dependency_groups(const std::vector<CommonCauseSpec>& specs);

}  // namespace safetk::cca
