#include <algorithm>
#include <functional>
#include <set>

#include "safetk/diagnostics.hpp"
#include "safetk/tfpg/tfpg.hpp"

namespace safetk::tfpg {

std::string_view reason_name(Reason r) {
  switch (r) {
    case Reason::too_early:
      return "too-early";
    case Reason::too_late:
      return "too-late";
    case Reason::missing_cause:
      return "missing-cause";
    case Reason::and_incomplete:
      return "and-incomplete";
    case Reason::mode_violation:
      return "mode-violation";
  }
  return "?";
}

namespace {

// Per-step view of one edge once its source is active.
struct Timeline {
  std::optional<std::size_t> start;  // source activation
  std::vector<char> enabled;
  std::vector<char> allowed;
  std::vector<std::int64_t> count;
  std::optional<std::size_t> deadline;  // first enabled step whose counter equals tmax
};

Timeline timeline(const Edge& e, std::optional<std::size_t> start, const std::vector<std::string>& mode) {
  Timeline tl;
  tl.start = start;
  std::size_t n = mode.size();
  tl.enabled.assign(n, 0);
  tl.allowed.assign(n, 0);
  tl.count.assign(n, 0);
  if (!start) return tl;
  std::int64_t c = 0;
  for (std::size_t t = *start; t < n; ++t) {
    bool en = !e.modes || std::binary_search(e.modes->begin(), e.modes->end(), mode[t]);
    tl.enabled[t] = en;
    tl.count[t] = c;
    tl.allowed[t] = en && c >= e.tmin && (!e.tmax || c <= *e.tmax);
    if (en && e.tmax && c == *e.tmax && !tl.deadline) tl.deadline = t;
    if (en) ++c;
  }
  return tl;
}

// Rank of each node: position of its strongly connected component in a
// topological order of the condensation, smallest ids first among ties.
std::map<std::string, std::size_t> condensation_rank(const Tfpg& g) {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  for (const auto& [id, k] : g.nodes) {
    index[id] = ids.size();
    ids.push_back(id);
  }
  std::size_t n = ids.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const Edge& e : g.edges) succ[index[e.src]].push_back(index[e.dst]);

  // Tarjan.
  std::vector<int> low(n, 0), num(n, -1);
  std::vector<std::size_t> comp(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0;
  std::size_t ncomp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    num[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (std::size_t w : succ[v]) {
      if (num[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], num[w]);
      }
    }
    if (low[v] == num[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (num[v] < 0) visit(v);
  }

  std::vector<std::size_t> first_member(ncomp, n), indegree(ncomp, 0);
  std::vector<std::set<std::size_t>> csucc(ncomp);
  for (std::size_t v = 0; v < n; ++v) {
    first_member[comp[v]] = std::min(first_member[comp[v]], v);
    for (std::size_t w : succ[v]) {
      if (comp[v] != comp[w] && csucc[comp[v]].insert(comp[w]).second) ++indegree[comp[w]];
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> ready;  // (first member, component)
  for (std::size_t c = 0; c < ncomp; ++c) {
    if (!indegree[c]) ready.insert({first_member[c], c});
  }
  std::vector<std::size_t> crank(ncomp, 0);
  std::size_t next = 0;
  while (!ready.empty()) {
    std::size_t c = ready.begin()->second;
    ready.erase(ready.begin());
    crank[c] = next++;
    for (std::size_t d : csucc[c]) {
      if (--indegree[d] == 0) ready.insert({first_member[d], d});
    }
  }
  std::map<std::string, std::size_t> rank;
  for (std::size_t v = 0; v < n; ++v) rank[ids[v]] = crank[comp[v]];
  return rank;
}

// Reason for an edge that cannot fire at step t.
Reason blocked_reason(const Edge& e, const Timeline& tl, std::size_t t) {
  if (!tl.enabled[t]) return Reason::mode_violation;
  if (tl.count[t] < e.tmin) return Reason::too_early;
  return Reason::too_late;
}

std::optional<Inconsistency> check_node(const Tfpg& g, const std::string& v, NodeKind kind,
                                        const ActivationTrace& at, const std::map<const Edge*, Timeline>& lines) {
  auto in = g.incoming(v);
  auto act = at.activated.find(v);
  auto line = [&](const Edge* e) -> const Timeline& { return lines.at(e); };

  if (act == at.activated.end()) {
    if (in.empty()) return std::nullopt;
    if (kind == NodeKind::or_node) {
      std::optional<std::size_t> d;
      for (const Edge* e : in) {
        if (auto de = line(e).deadline; de && (!d || *de < *d)) d = de;
      }
      if (d) return Inconsistency{v, *d, Reason::too_late};
      return std::nullopt;
    }
    std::size_t latest = 0;
    for (const Edge* e : in) {
      const auto& dl = line(e).deadline;
      if (!dl) return std::nullopt;
      latest = std::max(latest, *dl);
    }
    return Inconsistency{v, latest, Reason::too_late};
  }

  const std::size_t t = act->second;
  if (in.empty()) return Inconsistency{v, t, Reason::missing_cause};
  if (kind == NodeKind::or_node) {
    std::optional<std::size_t> d;
    bool any_pending = false;
    for (const Edge* e : in) {
      const Timeline& tl = line(e);
      if (tl.deadline && *tl.deadline < t && (!d || *tl.deadline < *d)) d = tl.deadline;
      any_pending = any_pending || (tl.start && *tl.start <= t);
    }
    if (d) return Inconsistency{v, *d, Reason::too_late};
    if (!any_pending) return Inconsistency{v, t, Reason::missing_cause};
    std::optional<Reason> why;
    for (const Edge* e : in) {
      const Timeline& tl = line(e);
      if (!tl.start || *tl.start > t) continue;
      if (tl.allowed[t]) return std::nullopt;
      Reason r = blocked_reason(*e, tl, t);
      if (!why || *why == Reason::mode_violation) why = r;
    }
    return Inconsistency{v, t, *why};
  }

  // AND: every edge fires at some step <= t, the last one exactly at t.
  for (const Edge* e : in) {
    const Timeline& tl = line(e);
    if (!tl.start || *tl.start > t) return Inconsistency{v, t, Reason::and_incomplete};
  }
  bool fires_now = false;
  std::optional<Reason> why_now;
  for (const Edge* e : in) {
    const Timeline& tl = line(e);
    bool some = false;
    for (std::size_t s = *tl.start; s <= t && !some; ++s) some = tl.allowed[s];
    if (!some) return Inconsistency{v, t, blocked_reason(*e, tl, t)};
    if (tl.allowed[t]) {
      fires_now = true;
    } else {
      Reason r = blocked_reason(*e, tl, t);
      if (!why_now || *why_now == Reason::mode_violation) why_now = r;
    }
  }
  if (fires_now) return std::nullopt;
  return Inconsistency{v, t, *why_now};
}

}  // namespace

std::optional<Inconsistency> admits(const Tfpg& g, const ActivationTrace& at) {
  const std::size_t len = at.mode.size();
  for (const std::string& m : at.mode) {
    if (!std::binary_search(g.modes.begin(), g.modes.end(), m)) throw InputError("activation trace uses unknown mode " + m);
  }
  for (const auto& [id, t] : at.activated) {
    if (!g.nodes.count(id)) throw InputError("activation trace names unknown node " + id);
    if (t >= len) throw InputError("activation of " + id + " lies beyond the trace");
  }
  std::map<const Edge*, Timeline> lines;
  for (const Edge& e : g.edges) {
    auto src = at.activated.find(e.src);
    lines.emplace(&e, timeline(e, src == at.activated.end() ? std::nullopt : std::optional(src->second), at.mode));
  }
  auto rank = condensation_rank(g);
  std::optional<Inconsistency> first;
  auto key = [&](const Inconsistency& i) { return std::tie(rank[i.node], i.step, i.node); };
  for (const auto& [id, kind] : g.nodes) {
    if (kind == NodeKind::failure) continue;
    auto found = check_node(g, id, kind, at, lines);
    if (found && (!first || key(*found) < key(*first))) first = found;
  }
  return first;
}

}  // namespace safetk::tfpg
