#include <algorithm>
#include <numeric>
#include <set>

#include "safetk/diagnostics.hpp"
#include "safetk/lexer.hpp"
#include "safetk/tfpg/tfpg.hpp"

namespace safetk::tfpg {

bool NodeBinding::Node::operator==(const Node& o) const {
  return id == o.id && kind == o.kind && predicate == o.predicate && event == o.event;
}

NodeBinding parse_binding(std::string_view text) {
  TokenCursor cur(text);
  NodeBinding b;
  std::set<std::string> modes, nodes;
  while (!cur.at_end()) {
    if (cur.accept_word("mode")) {
      std::string name = cur.expect_identifier("mode");
      if (!modes.insert(name).second) cur.fail("duplicate mode " + name);
      cur.expect_punct(":");
      b.modes.emplace_back(name, sts::parse_expr(cur));
    } else if (cur.accept_word("failure")) {
      NodeBinding::Node n;
      n.kind = NodeKind::failure;
      n.id = cur.expect_identifier("node id");
      n.event = cur.accept_punct(":") ? cur.expect_identifier("fault event") : n.id;
      if (!nodes.insert(n.id).second) cur.fail("duplicate node " + n.id);
      b.nodes.push_back(std::move(n));
    } else if (cur.accept_word("discrepancy")) {
      NodeBinding::Node n;
      n.id = cur.expect_identifier("node id");
      if (cur.accept_word("or")) {
        n.kind = NodeKind::or_node;
      } else if (cur.accept_word("and")) {
        n.kind = NodeKind::and_node;
      } else {
        cur.fail_expected("'or' or 'and'");
      }
      if (!nodes.insert(n.id).second) cur.fail("duplicate node " + n.id);
      cur.expect_punct(":");
      n.predicate = sts::parse_expr(cur);
      b.nodes.push_back(std::move(n));
    } else {
      cur.fail_expected("'mode', 'failure' or 'discrepancy'");
    }
    cur.expect_punct(";");
  }
  return b;
}

std::string write_binding(const NodeBinding& b) {
  std::string out;
  for (const auto& [name, e] : b.modes) out += "mode " + name + " : " + sts::to_string(e) + ";\n";
  for (const NodeBinding::Node& n : b.nodes) {
    if (n.kind == NodeKind::failure) {
      out += "failure " + n.id + (n.event == n.id ? "" : " : " + n.event) + ";\n";
    } else {
      out += "discrepancy " + n.id + " " + std::string(kind_name(n.kind)) + " : " + sts::to_string(n.predicate) + ";\n";
    }
  }
  return out;
}

BoundModel::BoundModel(const fault::ExtendedModel& xm, const NodeBinding& binding) : model_(xm.model) {
  if (binding.nodes.size() > 64) throw InputError("node binding: at most 64 nodes are supported");
  std::vector<std::size_t> order(binding.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return binding.nodes[a].id < binding.nodes[b].id; });
  for (std::size_t i : order) {
    const NodeBinding::Node& n = binding.nodes[i];
    if (!ids_.empty() && ids_.back() == n.id) throw InputError("node binding: duplicate node " + n.id);
    ids_.push_back(n.id);
    kinds_.push_back(n.kind);
    if (n.kind == NodeKind::failure) {
      const fault::EventInfo* ev = xm.find_event(n.event);
      if (!ev) throw InputError("node binding: failure " + n.id + " names unknown fault event " + n.event);
      predicates_.push_back(model_.compile_state_predicate(ev->occurrence));
    } else {
      try {
        predicates_.push_back(model_.compile_state_predicate(n.predicate));
      } catch (const InputError& e) {
        throw InputError("node binding: predicate of " + n.id + ": " + e.what());
      }
    }
  }
  std::vector<std::pair<std::string, sts::Expr>> modes = binding.modes;
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (modes.empty()) throw InputError("node binding: no modes declared");
  for (const auto& [name, e] : modes) {
    if (!mode_names_.empty() && mode_names_.back() == name) throw InputError("node binding: duplicate mode " + name);
    mode_names_.push_back(name);
    mode_predicates_.push_back(model_.compile_state_predicate(e));
  }
}

std::optional<std::size_t> BoundModel::index(std::string_view id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::uint64_t BoundModel::truth(sts::StateView s) const {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    if (model_.holds(predicates_[i], s)) m |= std::uint64_t{1} << i;
  }
  return m;
}

std::size_t BoundModel::mode(sts::StateView s) const {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < mode_predicates_.size(); ++i) {
    if (!model_.holds(mode_predicates_[i], s)) continue;
    if (found) {
      throw InputError("node binding: modes " + mode_names_[*found] + " and " + mode_names_[i] + " both hold in " +
                       model_.format_state(s));
    }
    found = i;
  }
  if (!found) throw InputError("node binding: no mode holds in " + model_.format_state(s));
  return *found;
}

ActivationTrace BoundModel::activation_trace(const sts::Trace& trace) const {
  ActivationTrace at;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    at.mode.push_back(mode_names_[mode(trace[t])]);
    std::uint64_t m = truth(trace[t]);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if ((m >> i & 1) && !at.activated.count(ids_[i])) at.activated[ids_[i]] = t;
    }
  }
  return at;
}

void BoundModel::check_against(const Tfpg& g) const {
  if (mode_names_ != g.modes) throw InputError("node binding: modes differ from the graph's");
  if (ids_.size() != g.nodes.size()) throw InputError("node binding: node set differs from the graph's");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    auto it = g.nodes.find(ids_[i]);
    if (it == g.nodes.end()) throw InputError("node binding: " + ids_[i] + " is not a graph node");
    if (it->second != kinds_[i]) throw InputError("node binding: kind of " + ids_[i] + " differs from the graph's");
  }
}

}  // namespace safetk::tfpg
