#include "safetk/analysis/mcs.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <memory>
#include <map>
#include <set>

#include "safetk/format.hpp"

namespace safetk::analysis {

using fault::DisableConstraint;
using fault::ExtendedModel;
using sts::Expr;
using sts::State;
using sts::StateView;
using sts::TypedModel;

namespace {

using Mask = std::uint64_t;

bool subset(const CutSet& a, const CutSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

bool by_card_then_lex(const CutSet& a, const CutSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// Antichain insert: keeps only inclusion-minimal masks. Returns whether `m`
// was added.
bool insert_minimal(std::vector<Mask>& set, Mask m) {
  for (Mask x : set) {
    if ((x & m) == x) return false;
  }
  std::erase_if(set, [&](Mask x) { return (m & x) == m; });
  set.push_back(m);
  return true;
}

std::vector<std::string> sorted_names(const ExtendedModel& xm) {
  std::vector<std::string> names = xm.event_names();
  std::sort(names.begin(), names.end());
  return names;
}

CutSet to_cut(Mask m, const std::vector<std::string>& names) {
  CutSet c;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (m >> i & 1) c.push_back(names[i]);
  }
  return c;
}

void finish(CutSetResult& r) {
  r.mcs = minimize(std::move(r.mcs));
  if (!r.mcs.empty() && r.mcs.front().empty()) {
    r.nominal_reachable = true;
    r.mcs = {CutSet{}};
  }
}

}  // namespace

std::vector<CutSet> minimize(std::vector<CutSet> sets) {
  for (CutSet& c : sets) std::sort(c.begin(), c.end());
  std::sort(sets.begin(), sets.end(), by_card_then_lex);
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<CutSet> out;
  for (CutSet& c : sets) {
    if (std::none_of(out.begin(), out.end(), [&](const CutSet& k) { return subset(k, c); })) {
      out.push_back(std::move(c));
    }
  }
  return out;
}

sts::SymbolicModel restrict_model(const ExtendedModel& xm, const std::vector<std::string>& allowed) {
  sts::SymbolicModel m = xm.model;
  for (const fault::EventInfo& e : xm.events) {
    if (std::find(allowed.begin(), allowed.end(), e.name) != allowed.end()) continue;
    (e.disable.section == DisableConstraint::Section::invar ? m.invar : m.trans).push_back(e.disable.expr);
  }
  return m;
}

CutSetResult compute_mcs(const ExtendedModel& xm, const Expr& tle, const AnalysisOptions& opt) {
  const std::vector<std::string> names = sorted_names(xm);
  if (names.size() > 64) {
    throw InputError("cut set analysis supports at most 64 events, the model has " + std::to_string(names.size()));
  }
  CutSetResult r;
  r.tle = tle;
  r.max_card = opt.max_card;
  r.step_bound = opt.step_bound;

  TypedModel model(xm.model);
  sts::Program target = model.compile_state_predicate(tle);
  // Per event, the disable constraint compiled against the unrestricted model.
  struct Disable {
    Mask bit;
    bool trans;
    sts::Program program;
  };
  std::vector<Disable> disables;
  for (const fault::EventInfo& e : xm.events) {
    auto idx = std::lower_bound(names.begin(), names.end(), e.name) - names.begin();
    bool trans = e.disable.section == DisableConstraint::Section::trans;
    disables.push_back({Mask{1} << idx, trans,
                        trans ? model.compile_transition_predicate(e.disable.expr)
                              : model.compile_state_predicate(e.disable.expr)});
  }

  std::optional<std::size_t> graph_bound;
  if (opt.step_bound) graph_bound = *opt.step_bound + 1;
  sts::StateGraph g(model, graph_bound, opt.cap);
  const std::uint32_t n = static_cast<std::uint32_t>(g.size());

  std::vector<Mask> smask(n, 0);
  for (std::uint32_t s = 0; s < n; ++s) {
    for (const Disable& d : disables) {
      if (!d.trans && !model.holds(d.program, g.state(s))) smask[s] |= d.bit;
    }
  }
  auto edge_mask = [&](std::uint32_t s, std::uint32_t t) {
    Mask m = smask[t];
    for (const Disable& d : disables) {
      if (d.trans && !model.holds(d.program, g.state(s), g.state(t))) m |= d.bit;
    }
    return m;
  };

  const std::size_t card = std::min<std::size_t>(opt.max_card, 64);
  std::vector<std::vector<Mask>> labels(n);
  std::vector<Mask> pruned;
  std::vector<std::pair<std::uint32_t, Mask>> delta;
  auto offer = [&](std::uint32_t s, Mask m, std::vector<std::pair<std::uint32_t, Mask>>& out) {
    if (static_cast<std::size_t>(std::popcount(m)) > card) {
      insert_minimal(pruned, m);
      return;
    }
    if (insert_minimal(labels[s], m)) out.emplace_back(s, m);
  };
  for (std::uint32_t s : g.initial()) offer(s, smask[s], delta);

  std::size_t round = 0;
  bool bound_binding = false;
  while (!delta.empty()) {
    if (opt.step_bound && round == *opt.step_bound) {
      // One probe round past the bound decides whether the bound mattered.
      std::vector<std::vector<Mask>> probe = labels;
      for (const auto& [s, m] : delta) {
        if (std::find(labels[s].begin(), labels[s].end(), m) == labels[s].end()) continue;
        for (std::uint32_t t : g.successors(s)) {
          Mask nm = m | edge_mask(s, t);
          if (static_cast<std::size_t>(std::popcount(nm)) <= card && insert_minimal(probe[t], nm)) bound_binding = true;
        }
      }
      break;
    }
    std::vector<std::pair<std::uint32_t, Mask>> next_delta;
    for (const auto& [s, m] : delta) {
      // Skip masks superseded since they were added.
      if (std::find(labels[s].begin(), labels[s].end(), m) == labels[s].end()) continue;
      for (std::uint32_t t : g.successors(s)) offer(t, m | edge_mask(s, t), next_delta);
    }
    delta = std::move(next_delta);
    ++round;
  }

  std::vector<Mask> found;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!model.holds(target, g.state(s))) continue;
    for (Mask m : labels[s]) insert_minimal(found, m);
  }
  for (Mask m : found) r.mcs.push_back(to_cut(m, names));
  finish(r);
  bool card_binding = std::any_of(pruned.begin(), pruned.end(), [&](Mask p) {
    return std::none_of(found.begin(), found.end(), [&](Mask f) { return (f & p) == f; });
  });
  r.complete = !bound_binding && !card_binding;
  return r;
}

CutSetResult brute_force_mcs(const ExtendedModel& xm, const Expr& tle, const AnalysisOptions& opt) {
  const std::vector<std::string> names = sorted_names(xm);
  CutSetResult r;
  r.tle = tle;
  r.max_card = opt.max_card;
  r.step_bound = opt.step_bound;
  const std::size_t card = std::min(opt.max_card, names.size());
  // Subsets by increasing cardinality, lexicographic within a cardinality.
  std::vector<std::size_t> pick;
  std::function<void(std::size_t, std::size_t)> enumerate = [&](std::size_t start, std::size_t left) {
    if (left == 0) {
      CutSet c;
      for (std::size_t i : pick) c.push_back(names[i]);
      TypedModel restricted(restrict_model(xm, c));
      if (sts::reach(restricted, tle, opt.step_bound, opt.cap)) r.mcs.push_back(c);
      return;
    }
    for (std::size_t i = start; i + left <= names.size(); ++i) {
      pick.push_back(i);
      enumerate(i + 1, left - 1);
      pick.pop_back();
    }
  };
  for (std::size_t k = 0; k <= card; ++k) enumerate(0, k);
  finish(r);
  r.complete = !opt.step_bound && card >= names.size();
  return r;
}

std::optional<sts::Trace> witness(const ExtendedModel& xm, const Expr& tle, const CutSet& cut,
                                  const AnalysisOptions& opt) {
  TypedModel restricted(restrict_model(xm, cut));
  return sts::reach(restricted, tle, opt.step_bound, opt.cap);
}

namespace {

// Breadth-first search over (state, first-occurrence groups) in the model
// restricted to `events`. Calls `on_hit(groups, node)` at TLE states where
// every event has occurred; returning true stops the search.
struct OrderSearch {
  const ExtendedModel& xm;
  const Expr& tle;
  const std::vector<std::string>& events;
  const AnalysisOptions& opt;

  using Groups = std::vector<Mask>;
  struct Node {
    std::uint32_t state;
    Groups groups;
    std::uint32_t parent;
  };

  template <typename F>
  void run(F&& on_hit, std::vector<Node>& nodes, std::unique_ptr<sts::StateGraph>& graph,
           std::unique_ptr<TypedModel>& model) {
    model = std::make_unique<TypedModel>(restrict_model(xm, events));
    sts::Program target = model->compile_state_predicate(tle);
    std::vector<sts::Program> occ;
    for (const std::string& e : events) occ.push_back(model->compile_state_predicate(xm.find_event(e)->occurrence));
    graph = std::make_unique<sts::StateGraph>(*model, opt.step_bound, opt.cap);
    const Mask all = events.size() == 64 ? ~Mask{0} : (Mask{1} << events.size()) - 1;

    auto occurred = [&](std::uint32_t s) {
      Mask m = 0;
      for (std::size_t i = 0; i < occ.size(); ++i) {
        if (model->holds(occ[i], graph->state(s))) m |= Mask{1} << i;
      }
      return m;
    };
    std::set<std::pair<std::uint32_t, Groups>> seen;
    std::deque<std::pair<std::uint32_t, std::size_t>> queue;  // node, depth
    auto visit = [&](std::uint32_t s, Groups groups, std::uint32_t parent, std::size_t depth) {
      Mask have = 0;
      for (Mask g : groups) have |= g;
      Mask fresh = occurred(s) & ~have;
      if (fresh) groups.push_back(fresh);
      if (!seen.emplace(s, groups).second) return false;
      auto id = static_cast<std::uint32_t>(nodes.size());
      nodes.push_back({s, groups, parent == UINT32_MAX ? id : parent});
      if ((have | fresh) == all && model->holds(target, graph->state(s))) {
        if (on_hit(nodes.back().groups, id)) return true;
      }
      queue.emplace_back(id, depth);
      return false;
    };
    for (std::uint32_t s : graph->initial()) {
      if (visit(s, {}, UINT32_MAX, 0)) return;
    }
    while (!queue.empty()) {
      auto [id, depth] = queue.front();
      queue.pop_front();
      if (opt.step_bound && depth >= *opt.step_bound) continue;
      std::uint32_t s = nodes[id].state;
      for (std::uint32_t t : graph->successors(s)) {
        Groups gs = nodes[id].groups;
        if (visit(t, std::move(gs), id, depth + 1)) return;
      }
    }
  }
};

void linearize(const std::vector<Mask>& groups, std::size_t at, Order& prefix, const std::vector<std::string>& events,
               std::set<Order>& out) {
  if (at == groups.size()) {
    out.insert(prefix);
    return;
  }
  std::vector<std::string> members;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (groups[at] >> i & 1) members.push_back(events[i]);
  }
  std::sort(members.begin(), members.end());
  do {
    std::size_t len = prefix.size();
    prefix.insert(prefix.end(), members.begin(), members.end());
    linearize(groups, at + 1, prefix, events, out);
    prefix.resize(len);
  } while (std::next_permutation(members.begin(), members.end()));
}

}  // namespace

std::vector<CutSequence> compute_cut_sequences(const ExtendedModel& xm, const Expr& tle, const CutSetResult& result,
                                               const AnalysisOptions& opt) {
  std::vector<CutSequence> out;
  for (const CutSet& c : result.mcs) {
    CutSequence seq;
    seq.base = c;
    if (c.size() > 64) throw InputError("cut sequences support at most 64 events per cut set");
    std::set<Order> orders;
    std::vector<OrderSearch::Node> nodes;
    std::unique_ptr<sts::StateGraph> graph;
    std::unique_ptr<TypedModel> model;
    OrderSearch search{xm, tle, c, opt};
    search.run(
        [&](const std::vector<Mask>& groups, std::uint32_t) {
          Order prefix;
          linearize(groups, 0, prefix, c, orders);
          return false;
        },
        nodes, graph, model);
    seq.orders.assign(orders.begin(), orders.end());
    out.push_back(std::move(seq));
  }
  return out;
}

std::optional<sts::Trace> order_witness(const ExtendedModel& xm, const Expr& tle, const Order& order,
                                        const AnalysisOptions& opt) {
  std::vector<OrderSearch::Node> nodes;
  std::unique_ptr<sts::StateGraph> graph;
  std::unique_ptr<TypedModel> model;
  std::optional<std::uint32_t> hit;
  OrderSearch search{xm, tle, order, opt};
  search.run(
      [&](const std::vector<Mask>& groups, std::uint32_t id) {
        // `order` lists the events by index; a group must cover a contiguous run.
        std::size_t pos = 0;
        for (Mask g : groups) {
          std::size_t k = static_cast<std::size_t>(std::popcount(g));
          for (std::size_t i = pos; i < pos + k; ++i) {
            if (!(g >> i & 1)) return false;
          }
          pos += k;
        }
        hit = id;
        return true;
      },
      nodes, graph, model);
  if (!hit) return std::nullopt;
  sts::Trace t;
  for (std::uint32_t id = *hit;; id = nodes[id].parent) {
    StateView s = graph->state(nodes[id].state);
    t.emplace_back(s.begin(), s.end());
    if (nodes[id].parent == id) break;
  }
  std::reverse(t.begin(), t.end());
  return t;
}

std::string format_mcs_tsv(const CutSetResult& r) {
  std::string out;
  for (const CutSet& c : r.mcs) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out += '\t';
      out += c[i];
    }
    out += '\n';
  }
  return out;
}

std::string format_mcs_xml(const CutSetResult& r) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<cut-sets tle=\"" + xml_escape(sts::to_string(r.tle)) + "\" max-card=\"" + std::to_string(r.max_card) +
         "\" step-bound=\"" + (r.step_bound ? std::to_string(*r.step_bound) : std::string("none")) +
         "\" complete=\"" + (r.complete ? "true" : "false") + "\"";
  if (r.nominal_reachable) out += " nominal-reachable=\"true\"";
  out += ">\n";
  for (const CutSet& c : r.mcs) {
    out += "  <cut-set>\n";
    for (const std::string& e : c) out += "    <event name=\"" + xml_escape(e) + "\"/>\n";
    out += "  </cut-set>\n";
  }
  out += "</cut-sets>\n";
  return out;
}

}  // namespace safetk::analysis
