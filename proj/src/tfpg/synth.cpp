#include <algorithm>
#include <bitset>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>

#include "safetk/diagnostics.hpp"
#include "safetk/sts/explore.hpp"
#include "safetk/tfpg/tfpg.hpp"

namespace safetk::tfpg {

namespace {

using sts::Program;
using sts::StateView;
using Code = Program::Code;

enum Frame { prev_frame, cur_frame };

struct Read {
  std::uint32_t var;
  Frame frame;
  bool operator<(const Read& o) const { return std::tie(var, frame) < std::tie(o.var, o.frame); }
};

// Evaluates node `idx` and records the variables its value depends on,
// following only the operands that decide short-circuit operators and the
// branch an if-then-else actually takes.
std::int64_t eval_reads(const sts::TypedModel& m, const Program& p, std::uint32_t idx, StateView cur, StateView nxt,
                        Frame cur_is, std::set<Read>& out) {
  const Program::Node& n = p.nodes[idx];
  auto kid = [&](std::uint32_t k) { return p.kids[n.first_kid + k]; };
  auto val = [&](std::uint32_t k, std::set<Read>& into) { return eval_reads(m, p, kid(k), cur, nxt, cur_is, into); };
  switch (n.code) {
    case Code::constant:
      return n.value;
    case Code::var_cur:
      out.insert({static_cast<std::uint32_t>(n.value), cur_is});
      return m.var(n.value).values[cur[n.value]];
    case Code::var_next:
      out.insert({static_cast<std::uint32_t>(n.value), cur_frame});
      return m.var(n.value).values[nxt[n.value]];
    case Code::and_:
    case Code::or_:
    case Code::implies: {
      std::set<Read> a, b;
      std::int64_t x = val(0, a) != 0;
      std::int64_t y = val(1, b) != 0;
      if (n.code == Code::implies) x = !x;
      bool decisive = n.code == Code::and_ ? !x : x;  // the first operand alone fixes the result
      bool result = n.code == Code::and_ ? (x && y) : (x || y);
      if (decisive) {
        out.insert(a.begin(), a.end());
      } else if ((n.code == Code::and_) ? !y : y) {
        out.insert(b.begin(), b.end());
      } else {
        out.insert(a.begin(), a.end());
        out.insert(b.begin(), b.end());
      }
      return result;
    }
    case Code::ite: {
      std::int64_t c = val(0, out);
      return c ? val(1, out) : eval_reads(m, p, kid(2), cur, nxt, cur_is, out);
    }
    default: {
      std::vector<std::int64_t> v;
      for (std::uint32_t k = 0; k < n.num_kids; ++k) v.push_back(val(k, out));
      switch (n.code) {
        case Code::not_:
          return !v[0];
        case Code::neg:
          return -v[0];
        case Code::iff:
          return (v[0] != 0) == (v[1] != 0);
        case Code::eq:
          return v[0] == v[1];
        case Code::ne:
          return v[0] != v[1];
        case Code::lt:
          return v[0] < v[1];
        case Code::le:
          return v[0] <= v[1];
        case Code::gt:
          return v[0] > v[1];
        case Code::ge:
          return v[0] >= v[1];
        case Code::add:
          return v[0] + v[1];
        case Code::sub:
          return v[0] - v[1];
        case Code::mul:
          return v[0] * v[1];
        case Code::in:
          return std::find(v.begin() + 1, v.end(), v[0]) != v.end();
        case Code::min:
          return std::min(v[0], v[1]);
        case Code::max:
          return std::max(v[0], v[1]);
        default:
          return 0;
      }
    }
  }
}

struct Definition {
  const Program* program;
  std::uint32_t rhs;
};

struct Context {
  std::size_t node;
  std::size_t mode;
  std::set<std::size_t> causes;
};

class Slicer {
 public:
  Slicer(const BoundModel& bm, const std::vector<std::uint32_t>& mode_vars) : bm_(bm), m_(bm.model()) {
    for (std::size_t i = 0; i < bm.num_nodes(); ++i) {
      const Program& p = bm.predicate(i);
      reads_.emplace_back(p.cur_vars.begin(), p.cur_vars.end());
    }
    skip_.insert(mode_vars.begin(), mode_vars.end());
    for (const Program& p : m_.transition_constraints()) {
      const Program::Node& root = p.nodes[p.root];
      if (root.code != Code::eq) continue;
      for (std::uint32_t side = 0; side < 2; ++side) {
        const Program::Node& lhs = p.nodes[p.kids[root.first_kid + side]];
        if (lhs.code != Code::var_next) continue;
        auto var = static_cast<std::uint32_t>(lhs.value);
        std::uint32_t rhs = p.kids[root.first_kid + 1 - side];
        if (reads_next(p, rhs, var)) continue;
        defs_.emplace(var, Definition{&p, rhs});
        break;
      }
    }
  }

  /// Bound nodes that explain the first activation of `v` on the step
  /// `prev` -> `cur` (`prev` empty at the initial step).
  std::set<std::size_t> causes(std::size_t v, std::optional<StateView> prev, StateView cur) {
    v_ = v;
    prev_ = prev;
    cur_ = cur;
    truth_[prev_frame] = prev ? bm_.truth(*prev) : 0;
    truth_[cur_frame] = bm_.truth(cur);
    found_.clear();
    expanded_.clear();
    std::set<Read> own;
    eval_reads(m_, bm_.predicate(v), bm_.predicate(v).root, cur, {}, cur_frame, own);
    for (const Read& r : own) expand(r.var);
    return found_;
  }

 private:
  bool reads_next(const Program& p, std::uint32_t idx, std::uint32_t var) const {
    const Program::Node& n = p.nodes[idx];
    if (n.code == Code::var_next && n.value == var) return true;
    for (std::uint32_t k = 0; k < n.num_kids; ++k) {
      if (reads_next(p, p.kids[n.first_kid + k], var)) return true;
    }
    return false;
  }

  bool candidates(const Read& r) {
    bool any = false;
    for (std::size_t w = 0; w < bm_.num_nodes(); ++w) {
      if (w == v_ || !(truth_[r.frame] >> w & 1) || !reads_[w].count(r.var)) continue;
      // Nodes that observe everything v observes and more sit downstream of v.
      const auto& rv = reads_[v_];
      if (reads_[w].size() > rv.size() && std::includes(reads_[w].begin(), reads_[w].end(), rv.begin(), rv.end())) {
        continue;
      }
      found_.insert(w);
      any = true;
    }
    return any;
  }

  // Explains the current value of `var` through its transition definition,
  // or as a leaf when it has none.
  void expand(std::uint32_t var) {
    if (skip_.count(var) || !expanded_.insert(var).second) return;
    auto def = defs_.find(var);
    if (def == defs_.end() || !prev_) {
      candidates({var, cur_frame});
      return;
    }
    std::set<Read> reads;
    eval_reads(m_, *def->second.program, def->second.rhs, *prev_, cur_, prev_frame, reads);
    for (const Read& r : reads) {
      if (skip_.count(r.var)) continue;
      if (candidates(r)) continue;
      if (r.frame == cur_frame) expand(r.var);
    }
  }

  const BoundModel& bm_;
  const sts::TypedModel& m_;
  std::vector<std::set<std::uint32_t>> reads_;
  std::unordered_set<std::uint32_t> skip_;
  std::map<std::uint32_t, Definition> defs_;

  std::size_t v_ = 0;
  std::optional<StateView> prev_;
  StateView cur_;
  std::uint64_t truth_[2] = {0, 0};
  std::set<std::size_t> found_;
  std::set<std::uint32_t> expanded_;
};

using Reach = std::vector<std::bitset<64>>;

Reach closure(std::size_t n, const std::set<std::pair<std::size_t, std::size_t>>& edges) {
  Reach r(n);
  for (const auto& [u, v] : edges) r[u].set(v);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i][k]) r[i] |= r[k];
    }
  }
  return r;
}

// Drops a cause u when another cause of the same activation is reachable
// from u, but not the other way round.
std::set<std::size_t> reduce(const std::set<std::size_t>& causes, const Reach& reach) {
  std::set<std::size_t> out;
  for (std::size_t u : causes) {
    bool mediated = std::any_of(causes.begin(), causes.end(),
                                [&](std::size_t w) { return w != u && reach[u][w] && !reach[w][u]; });
    if (!mediated) out.insert(u);
  }
  return out;
}

}  // namespace

Tfpg synthesize_structure(const fault::ExtendedModel& xm, const NodeBinding& binding, std::size_t step_bound,
                          std::string name, sts::StateCap cap) {
  BoundModel bm(xm, binding);
  const sts::TypedModel& model = bm.model();
  std::vector<std::uint32_t> mode_vars;
  for (const auto& [mname, e] : binding.modes) {
    for (std::uint32_t v : model.compile_state_predicate(e).cur_vars) mode_vars.push_back(v);
  }
  Slicer slicer(bm, mode_vars);
  sts::StateGraph graph(model, step_bound, cap);

  std::vector<std::uint64_t> truth(graph.size());
  for (std::uint32_t s = 0; s < graph.size(); ++s) truth[s] = bm.truth(graph.state(s));
  std::uint64_t discrepancies = 0;
  for (std::size_t i = 0; i < bm.num_nodes(); ++i) {
    if (bm.kind(i) != NodeKind::failure) discrepancies |= std::uint64_t{1} << i;
  }

  constexpr std::uint32_t kNone = UINT32_MAX;
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::size_t>> seen;
  std::vector<Context> contexts;
  auto record = [&](std::uint32_t prev, std::uint32_t cur, std::uint64_t fresh) {
    for (std::size_t v = 0; v < bm.num_nodes(); ++v) {
      if (!(fresh >> v & 1) || !seen.insert({prev, cur, v}).second) continue;
      std::optional<StateView> p;
      if (prev != kNone) p = graph.state(prev);
      contexts.push_back({v, bm.mode(graph.state(cur)), slicer.causes(v, p, graph.state(cur))});
    }
  };

  // Breadth-first over (state, activated set) pairs.
  std::set<std::pair<std::uint32_t, std::uint64_t>> visited;
  std::vector<std::tuple<std::uint32_t, std::uint64_t, std::size_t>> queue;
  for (std::uint32_t s : graph.initial()) {
    record(kNone, s, truth[s] & discrepancies);
    if (visited.insert({s, truth[s]}).second) queue.emplace_back(s, truth[s], 0);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto [s, mask, depth] = queue[head];
    if (depth >= step_bound) continue;
    for (std::uint32_t succ : graph.successors(s)) {
      record(s, succ, truth[succ] & ~mask & discrepancies);
      std::uint64_t next = mask | truth[succ];
      if (visited.insert({succ, next}).second) {
        if (visited.size() > cap.max_states) throw ResourceError("tfpg synthesis exceeded the state cap");
        queue.emplace_back(succ, next, depth + 1);
      }
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const Context& c : contexts) {
    for (std::size_t u : c.causes) edges.insert({u, c.node});
  }
  for (;;) {
    Reach reach = closure(bm.num_nodes(), edges);
    std::set<std::pair<std::size_t, std::size_t>> kept;
    for (const Context& c : contexts) {
      for (std::size_t u : reduce(c.causes, reach)) kept.insert({u, c.node});
    }
    if (kept == edges) break;
    edges = std::move(kept);
  }
  Reach reach = closure(bm.num_nodes(), edges);
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::size_t>> modes;
  for (const Context& c : contexts) {
    for (std::size_t u : reduce(c.causes, reach)) modes[{u, c.node}].insert(c.mode);
  }

  Tfpg g;
  g.name = std::move(name);
  g.modes = bm.mode_names();
  for (std::size_t i = 0; i < bm.num_nodes(); ++i) g.nodes[bm.id(i)] = bm.kind(i);
  for (const auto& [key, ms] : modes) {
    Edge e;
    e.src = bm.id(key.first);
    e.dst = bm.id(key.second);
    if (ms.size() < g.modes.size()) {
      e.modes.emplace();
      for (std::size_t m : ms) e.modes->push_back(g.modes[m]);
    }
    g.edges.push_back(std::move(e));
  }
  g.normalize();
  return g;
}

}  // namespace safetk::tfpg
