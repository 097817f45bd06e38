#include <algorithm>
#include <cstring>
#include <deque>
#include <stdexcept>
#include <unordered_map>

#include "safetk/diagnostics.hpp"
#include "safetk/sts/explore.hpp"
#include "safetk/tfpg/tfpg.hpp"

namespace safetk::tfpg {

namespace {

struct EdgeInfo {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::uint32_t tmin = 0;
  std::optional<std::uint32_t> tmax;
  std::uint32_t cap = 0;       // counter values above this are indistinguishable
  std::vector<char> enabled;   // per mode index
};

// Per edge: elapsed enabled steps, and whether it could already have fired
// or was already due.
struct Monitor {
  std::uint32_t count = 0;
  bool fireable = false;
  bool overdue = false;
};

constexpr std::size_t kEdgeBytes = 5;

std::string encode(std::uint32_t sid, std::uint64_t mask, const std::vector<Monitor>& mon) {
  std::string key(12 + kEdgeBytes * mon.size(), '\0');
  std::memcpy(key.data(), &sid, 4);
  std::memcpy(key.data() + 4, &mask, 8);
  for (std::size_t i = 0; i < mon.size(); ++i) {
    char* p = key.data() + 12 + kEdgeBytes * i;
    std::memcpy(p, &mon[i].count, 4);
    p[4] = static_cast<char>((mon[i].fireable ? 1 : 0) | (mon[i].overdue ? 2 : 0));
  }
  return key;
}

void decode(std::string_view key, std::uint64_t& mask, std::vector<Monitor>& mon) {
  std::memcpy(&mask, key.data() + 4, 8);
  for (std::size_t i = 0; i < mon.size(); ++i) {
    const char* p = key.data() + 12 + kEdgeBytes * i;
    std::memcpy(&mon[i].count, p, 4);
    mon[i].fireable = p[4] & 1;
    mon[i].overdue = p[4] & 2;
  }
}

class Checker {
 public:
  Checker(const Tfpg& g, const BoundModel& bm) : bm_(bm), incoming_(bm.num_nodes()) {
    for (const Edge& e : g.edges) {
      EdgeInfo info;
      info.src = *bm.index(e.src);
      info.dst = *bm.index(e.dst);
      if (e.tmin > UINT32_MAX / 2 || (e.tmax && *e.tmax > UINT32_MAX / 2)) throw InputError("tfpg: delay bound too large");
      info.tmin = static_cast<std::uint32_t>(e.tmin);
      if (e.tmax) info.tmax = static_cast<std::uint32_t>(*e.tmax);
      info.cap = info.tmax ? *info.tmax + 1 : info.tmin;
      for (const std::string& m : bm.mode_names()) {
        info.enabled.push_back(!e.modes || std::binary_search(e.modes->begin(), e.modes->end(), m));
      }
      incoming_[info.dst].push_back(edges_.size());
      edges_.push_back(std::move(info));
    }
  }

  std::size_t num_edges() const { return edges_.size(); }

  /// Advances the monitors over one step entering a state with node truth
  /// `truth` in mode `mode`; false when the extended trace stops being admitted.
  bool step(std::uint64_t truth, std::size_t mode, std::uint64_t& mask, std::vector<Monitor>& mon) const {
    const std::uint64_t now = mask | truth;
    std::vector<char> allowed(edges_.size()), due(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const EdgeInfo& e = edges_[i];
      if (!(now >> e.src & 1)) continue;
      bool en = e.enabled[mode];
      std::uint32_t c = mon[i].count;
      allowed[i] = en && c >= e.tmin && (!e.tmax || c <= *e.tmax);
      due[i] = en && e.tmax && c == *e.tmax;
    }
    for (std::size_t v = 0; v < incoming_.size(); ++v) {
      if (bm_.kind(v) == NodeKind::failure || (mask >> v & 1)) continue;
      const auto& in = incoming_[v];
      bool any_allowed = std::any_of(in.begin(), in.end(), [&](std::size_t i) { return allowed[i]; });
      if (now >> v & 1) {
        if (!any_allowed) return false;
        if (bm_.kind(v) == NodeKind::and_node) {
          for (std::size_t i : in) {
            if (!(now >> edges_[i].src & 1) || !(mon[i].fireable || allowed[i])) return false;
          }
        }
      } else if (bm_.kind(v) == NodeKind::or_node) {
        if (std::any_of(in.begin(), in.end(), [&](std::size_t i) { return due[i]; })) return false;
      } else if (!in.empty() && std::all_of(in.begin(), in.end(), [&](std::size_t i) { return mon[i].overdue || due[i]; })) {
        return false;
      }
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const EdgeInfo& e = edges_[i];
      if ((now >> e.dst & 1) || !(now >> e.src & 1)) {
        mon[i] = Monitor{};
        continue;
      }
      mon[i].fireable = mon[i].fireable || allowed[i];
      mon[i].overdue = mon[i].overdue || due[i];
      if (e.enabled[mode]) mon[i].count = std::min(mon[i].count + 1, e.cap);
    }
    mask = now;
    return true;
  }

 private:
  const BoundModel& bm_;
  std::vector<EdgeInfo> edges_;
  std::vector<std::vector<std::size_t>> incoming_;
};

}  // namespace

ValidationReport validate_behavioral(const Tfpg& g, const NodeBinding& binding, const fault::ExtendedModel& xm,
                                     const ValidationOptions& opt) {
  BoundModel bm(xm, binding);
  bm.check_against(g);
  Checker checker(g, bm);
  sts::StateGraph graph(bm.model(), opt.step_bound, opt.cap);

  std::vector<std::uint64_t> truth(graph.size());
  std::vector<std::size_t> mode(graph.size());
  for (std::uint32_t s = 0; s < graph.size(); ++s) {
    truth[s] = bm.truth(graph.state(s));
    mode[s] = bm.mode(graph.state(s));
  }

  struct Entry {
    std::uint32_t sid;
    std::uint32_t parent;
    std::uint32_t depth;
  };
  constexpr std::uint32_t kNone = UINT32_MAX;
  std::deque<std::string> keys;
  std::unordered_map<std::string_view, std::uint32_t> index;
  std::vector<Entry> entries;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> violations;  // (parent entry, state)

  const std::size_t ne = checker.num_edges();
  auto add = [&](std::uint32_t sid, std::uint64_t mask, const std::vector<Monitor>& mon, std::uint32_t parent,
                 std::uint32_t depth) {
    keys.push_back(encode(sid, mask, mon));
    auto [it, fresh] = index.emplace(keys.back(), static_cast<std::uint32_t>(entries.size()));
    if (!fresh) {
      keys.pop_back();
      return;
    }
    if (entries.size() >= opt.cap.max_states) throw ResourceError("tfpg validation exceeded the state cap");
    entries.push_back({sid, parent, depth});
  };

  for (std::uint32_t s : graph.initial()) {
    std::uint64_t mask = 0;
    std::vector<Monitor> mon(ne);
    if (!checker.step(truth[s], mode[s], mask, mon)) {
      violations.emplace_back(kNone, s);
    } else {
      add(s, mask, mon, kNone, 0);
    }
  }
  std::vector<Monitor> mon(ne);
  for (std::size_t head = 0; violations.empty() && head < entries.size();) {
    const std::uint32_t depth = entries[head].depth;
    // One full BFS level at a time, so every shortest counterexample is seen.
    for (; head < entries.size() && entries[head].depth == depth; ++head) {
      if (depth >= opt.step_bound) continue;
      std::uint64_t base_mask = 0;
      std::vector<Monitor> base(ne);
      decode(keys[head], base_mask, base);
      for (std::uint32_t succ : graph.successors(entries[head].sid)) {
        std::uint64_t mask = base_mask;
        mon = base;
        if (!checker.step(truth[succ], mode[succ], mask, mon)) {
          violations.emplace_back(static_cast<std::uint32_t>(head), succ);
        } else if (violations.empty()) {
          add(succ, mask, mon, static_cast<std::uint32_t>(head), depth + 1);
        }
      }
    }
  }

  ValidationReport report;
  report.explored = entries.size();
  if (violations.empty()) return report;
  report.complete = false;
  std::vector<sts::Trace> traces;
  for (const auto& [parent, last] : violations) {
    std::vector<std::uint32_t> sids{last};
    for (std::uint32_t p = parent; p != kNone; p = entries[p].parent) sids.push_back(entries[p].sid);
    sts::Trace t;
    for (auto it = sids.rbegin(); it != sids.rend(); ++it) {
      auto s = graph.state(*it);
      t.emplace_back(s.begin(), s.end());
    }
    traces.push_back(std::move(t));
  }
  std::sort(traces.begin(), traces.end());
  traces.erase(std::unique(traces.begin(), traces.end()), traces.end());
  for (sts::Trace& t : traces) {
    if (report.counterexamples.size() >= std::max<std::size_t>(opt.max_counterexamples, 1)) break;
    auto first = admits(g, bm.activation_trace(t));
    if (!first) throw std::logic_error("tfpg validation: counterexample is admitted on replay");
    report.counterexamples.push_back({std::move(t), *first});
  }
  return report;
}

}  // namespace safetk::tfpg
