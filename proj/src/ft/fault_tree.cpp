#include "safetk/ft/fault_tree.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "bdd.hpp"
#include "safetk/format.hpp"

namespace safetk::ft {

using analysis::CutSet;
using analysis::Order;

const Node* FaultTree::find(std::string_view id) const {
  for (const Node& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<std::string> FaultTree::basic_events() const {
  std::set<std::string> s;
  for (const Node& n : nodes) {
    if (n.kind == NodeKind::basic) s.insert(n.event);
  }
  return {s.begin(), s.end()};
}

std::string kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::basic:
      return "BASIC";
    case NodeKind::and_:
      return "AND";
    case NodeKind::or_:
      return "OR";
    case NodeKind::pand:
      return "PAND";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

FaultTree build_fault_tree(const analysis::CutSetResult& result, const std::vector<analysis::CutSequence>* sequences,
                           const fault::ExtendedModel& xm, const std::string& tle_label) {
  FaultTree ft;
  ft.root = "top";
  ft.nodes.push_back({"top", NodeKind::or_, {}, "", std::nullopt, tle_label});
  std::map<CutSet, const std::vector<Order>*> orders;
  if (sequences) {
    for (const analysis::CutSequence& s : *sequences) orders[s.base] = &s.orders;
    std::set<CutSet> a(result.mcs.begin(), result.mcs.end());
    std::set<CutSet> b;
    for (const auto& [k, v] : orders) b.insert(k);
    if (a != b) throw InputError("cut sequences do not match the cut sets");
  }
  std::set<std::string> leaves;
  std::vector<Node> gates;
  int next_gate = 1;
  auto new_gate = [&](NodeKind kind, std::vector<std::string> children, std::string label) {
    std::string id = "g" + std::to_string(next_gate++);
    gates.push_back({id, kind, std::move(children), "", std::nullopt, std::move(label)});
    return id;
  };
  auto leaf = [&](const std::string& e) {
    leaves.insert(e);
    return "e:" + e;
  };
  for (const CutSet& c : result.mcs) {
    std::vector<std::string> kids;
    for (const std::string& e : c) kids.push_back(leaf(e));
    if (c.size() == 1) {
      ft.nodes[0].children.push_back(kids[0]);
      continue;
    }
    if (c.empty()) {
      ft.nodes[0].children.push_back(new_gate(NodeKind::and_, {}, "no fault needed"));
      continue;
    }
    const std::vector<Order>* ords = sequences ? orders[c] : nullptr;
    if (ords && ords->empty()) throw InputError("cut set {" + join(c, ", ") + "} has no admissible order");
    if (!ords || ords->size() == factorial(c.size())) {
      ft.nodes[0].children.push_back(new_gate(NodeKind::and_, kids, "cut set " + join(c, ", ")));
      continue;
    }
    auto pand = [&](const Order& o) {
      std::vector<std::string> ordered;
      for (const std::string& e : o) ordered.push_back("e:" + e);
      return new_gate(NodeKind::pand, ordered, "sequence " + join(o, ", "));
    };
    if (ords->size() == 1) {
      ft.nodes[0].children.push_back(pand(ords->front()));
      continue;
    }
    // Reserve the OR id before its PAND children so ids follow the tree top-down.
    std::string or_id = new_gate(NodeKind::or_, {}, "cut set " + join(c, ", "));
    std::vector<std::string> alts;
    for (const Order& o : *ords) alts.push_back(pand(o));
    std::find_if(gates.begin(), gates.end(), [&](const Node& n) { return n.id == or_id; })->children = alts;
    ft.nodes[0].children.push_back(or_id);
  }
  for (Node& g : gates) ft.nodes.push_back(std::move(g));
  for (const std::string& e : leaves) {
    const fault::EventInfo* info = xm.find_event(e);
    if (!info) throw InputError("cut set references unregistered event " + e);
    ft.nodes.push_back({"e:" + e, NodeKind::basic, {}, e, info->probability, e});
  }
  return ft;
}

ProbabilityAssignment assignment_from(const fault::ExtendedModel& xm,
                                      const std::vector<cca::CommonCauseSpec>& specs) {
  ProbabilityAssignment pa;
  for (const fault::EventInfo& e : xm.events) pa.p[e.name] = e.probability;
  pa.groups = cca::dependency_groups(specs);
  return pa;
}

namespace {

// The tree and its dependency groups as BDDs over sorted symbols.
struct Compiled {
  Bdd bdd;
  std::vector<std::string> vars;
  std::map<std::string, int> node;
};

Compiled compile(const FaultTree& ft, const std::vector<cca::DependencyGroup>& groups,
                 const std::map<std::string, double>* known) {
  Compiled c;
  std::set<std::string> symbols;
  std::map<std::string, std::string> cause_of;
  std::vector<std::string> events = ft.basic_events();
  symbols.insert(events.begin(), events.end());
  for (const cca::DependencyGroup& g : groups) {
    bool relevant = symbols.count(g.cause) > 0;
    for (const std::string& m : g.members) {
      bool in_tree = std::binary_search(events.begin(), events.end(), m);
      if (!in_tree && known && !known->count(m)) throw InputError("dependency group " + g.cause + " references unknown event " + m);
      if (in_tree) {
        relevant = true;
        cause_of[m] = g.cause;
      }
    }
    if (relevant) symbols.insert(g.cause);
  }
  c.vars.assign(symbols.begin(), symbols.end());
  auto var_of = [&](const std::string& s) {
    return static_cast<int>(std::lower_bound(c.vars.begin(), c.vars.end(), s) - c.vars.begin());
  };
  std::set<std::string> open;
  std::function<int(const std::string&)> build = [&](const std::string& id) -> int {
    auto it = c.node.find(id);
    if (it != c.node.end()) return it->second;
    const Node* n = ft.find(id);
    if (!n) throw InputError("fault tree references unknown node " + id);
    if (!open.insert(id).second) throw InputError("fault tree has a cycle through " + id);
    int r;
    if (n->kind == NodeKind::basic) {
      r = c.bdd.var(var_of(n->event));
      auto cause = cause_of.find(n->event);
      if (cause != cause_of.end()) r = c.bdd.or_(r, c.bdd.var(var_of(cause->second)));
    } else {
      bool conj = n->kind != NodeKind::or_;
      r = conj ? Bdd::kTrue : Bdd::kFalse;
      for (const std::string& k : n->children) r = conj ? c.bdd.and_(r, build(k)) : c.bdd.or_(r, build(k));
    }
    open.erase(id);
    c.node[id] = r;
    return r;
  };
  for (const Node& n : ft.nodes) build(n.id);
  return c;
}

std::map<std::string, double> symbol_values(const FaultTree& ft, const ProbabilityAssignment& pa,
                                            const std::vector<std::string>& vars) {
  std::map<std::string, double> out;
  for (const std::string& v : vars) {
    auto it = pa.p.find(v);
    if (it != pa.p.end()) {
      out[v] = it->second;
      continue;
    }
    auto g = std::find_if(pa.groups.begin(), pa.groups.end(), [&](const auto& x) { return x.cause == v; });
    if (g != pa.groups.end()) {
      out[v] = g->probability;
      continue;
    }
    const Node* n = ft.find("e:" + v);
    if (n && n->probability) {
      out[v] = *n->probability;
      continue;
    }
    throw InputError("missing probability for event " + v);
  }
  for (const auto& [k, p] : out) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("probability of " + k + " outside [0,1]");
  }
  return out;
}

}  // namespace

std::map<std::string, double> evaluate_probability(const FaultTree& ft, const ProbabilityAssignment& pa) {
  Compiled c = compile(ft, pa.groups, &pa.p);
  std::map<std::string, double> values = symbol_values(ft, pa, c.vars);
  std::vector<double> p;
  for (const std::string& v : c.vars) p.push_back(values.at(v));
  std::map<int, double> memo;
  std::function<double(int)> prob = [&](int n) -> double {
    if (n == Bdd::kFalse) return 0.0;
    if (n == Bdd::kTrue) return 1.0;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    double q = p[static_cast<std::size_t>(c.bdd.top(n))];
    double r = (1.0 - q) * prob(c.bdd.lo(n)) + q * prob(c.bdd.hi(n));
    memo[n] = r;
    return r;
  };
  std::map<std::string, double> out;
  for (const auto& [id, n] : c.node) out[id] = prob(n);
  return out;
}

double rare_event_approximation(const FaultTree& ft, const ProbabilityAssignment& pa) {
  Compiled c = compile(ft, {}, nullptr);
  std::map<std::string, double> values = symbol_values(ft, ProbabilityAssignment{pa.p, {}}, c.vars);
  const Node* root = ft.find(ft.root);
  double sum = 0.0;
  std::function<void(const std::string&, std::set<std::string>&)> leaves = [&](const std::string& id,
                                                                               std::set<std::string>& out) {
    const Node* n = ft.find(id);
    if (n->kind == NodeKind::basic) {
      out.insert(n->event);
      return;
    }
    for (const std::string& k : n->children) leaves(k, out);
  };
  for (const std::string& k : root->children) {
    std::set<std::string> ev;
    leaves(k, ev);
    double prod = 1.0;
    for (const std::string& e : ev) prod *= values.at(e);
    sum += prod;
  }
  return sum;
}

int ProbabilityExpr::intern(Node n) {
  auto key = std::make_tuple(static_cast<int>(n.kind), n.value, n.symbol, n.lhs, n.rhs);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  index_.emplace(key, id);
  return id;
}

int ProbabilityExpr::constant(double v) { return intern({Kind::constant, v, "", -1, -1}); }
int ProbabilityExpr::symbol(const std::string& name) { return intern({Kind::symbol, 0, name, -1, -1}); }

namespace {
bool is_const(const ProbabilityExpr& e, int i, double v) {
  return e.node(i).kind == ProbabilityExpr::Kind::constant && e.node(i).value == v;
}
}  // namespace

int ProbabilityExpr::add(int a, int b) {
  if (is_const(*this, a, 0)) return b;
  if (is_const(*this, b, 0)) return a;
  if (node(a).kind == Kind::constant && node(b).kind == Kind::constant) return constant(node(a).value + node(b).value);
  return intern({Kind::add, 0, "", a, b});
}

int ProbabilityExpr::sub(int a, int b) {
  if (is_const(*this, b, 0)) return a;
  if (a == b) return constant(0);
  if (node(a).kind == Kind::constant && node(b).kind == Kind::constant) return constant(node(a).value - node(b).value);
  return intern({Kind::sub, 0, "", a, b});
}

int ProbabilityExpr::mul(int a, int b) {
  if (is_const(*this, a, 0) || is_const(*this, b, 0)) return constant(0);
  if (is_const(*this, a, 1)) return b;
  if (is_const(*this, b, 1)) return a;
  if (node(a).kind == Kind::constant && node(b).kind == Kind::constant) return constant(node(a).value * node(b).value);
  return intern({Kind::mul, 0, "", a, b});
}

double ProbabilityExpr::evaluate(const std::map<std::string, double>& values) const {
  std::vector<double> v(nodes_.size());
  // Children always precede their parents.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Kind::constant:
        v[i] = n.value;
        break;
      case Kind::symbol: {
        auto it = values.find(n.symbol);
        if (it == values.end()) throw InputError("no value for symbol " + n.symbol);
        v[i] = it->second;
        break;
      }
      case Kind::add:
        v[i] = v[n.lhs] + v[n.rhs];
        break;
      case Kind::sub:
        v[i] = v[n.lhs] - v[n.rhs];
        break;
      case Kind::mul:
        v[i] = v[n.lhs] * v[n.rhs];
        break;
    }
  }
  return root_ < 0 ? 0.0 : v[static_cast<std::size_t>(root_)];
}

std::vector<std::string> ProbabilityExpr::symbols() const {
  std::set<std::string> s;
  for (const Node& n : nodes_) {
    if (n.kind == Kind::symbol) s.insert(n.symbol);
  }
  return {s.begin(), s.end()};
}

std::string ProbabilityExpr::to_string() const {
  std::function<std::string(int, int)> show = [&](int i, int ctx) -> std::string {
    const Node& n = node(i);
    switch (n.kind) {
      case Kind::constant:
        return format_real(n.value);
      case Kind::symbol:
        return probability_symbol(n.symbol);
      case Kind::add:
      case Kind::sub: {
        std::string s = show(n.lhs, 1) + (n.kind == Kind::add ? " + " : " - ") + show(n.rhs, 2);
        return ctx >= 2 ? "(" + s + ")" : s;
      }
      case Kind::mul:
        return show(n.lhs, 2) + " * " + show(n.rhs, 3);
    }
    return {};
  };
  return root_ < 0 ? "0" : show(root_, 0);
}

ProbabilityExpr symbolic_probability(const FaultTree& ft, const std::vector<cca::DependencyGroup>& groups) {
  Compiled c = compile(ft, groups, nullptr);
  ProbabilityExpr e;
  std::map<int, int> memo;
  std::function<int(int)> build = [&](int n) -> int {
    if (n == Bdd::kFalse) return e.constant(0);
    if (n == Bdd::kTrue) return e.constant(1);
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    int lo = build(c.bdd.lo(n));
    int hi = build(c.bdd.hi(n));
    int p = e.symbol(c.vars[static_cast<std::size_t>(c.bdd.top(n))]);
    // lo + p * (hi - lo)
    int r = e.add(lo, e.mul(p, e.sub(hi, lo)));
    memo[n] = r;
    return r;
  };
  e.set_root(build(c.node.at(ft.root)));
  return e;
}

std::string probability_symbol(const std::string& event) {
  std::string s = "p_";
  for (char ch : event) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
    s += ok ? ch : '_';
  }
  return s;
}

std::string render_prob_script(const ProbabilityExpr& expr, ScriptDialect dialect) {
  const bool py = dialect == ScriptDialect::python;
  std::vector<std::string> syms = expr.symbols();
  std::map<std::string, std::string> arg;
  std::set<std::string> used;
  for (const std::string& s : syms) {
    std::string base = probability_symbol(s);
    std::string name = base;
    for (int k = 2; used.count(name); ++k) name = base + "_" + std::to_string(k);
    used.insert(name);
    arg[s] = name;
  }
  // Temporaries for every operator node reachable from the root.
  std::vector<bool> live(expr.size(), false);
  if (expr.root() >= 0) live[static_cast<std::size_t>(expr.root())] = true;
  for (std::size_t i = expr.size(); i-- > 0;) {
    if (!live[i]) continue;
    const auto& n = expr.node(static_cast<int>(i));
    if (n.lhs >= 0) live[static_cast<std::size_t>(n.lhs)] = true;
    if (n.rhs >= 0) live[static_cast<std::size_t>(n.rhs)] = true;
  }
  std::map<int, std::string> name_of;
  auto operand = [&](int i) -> std::string {
    const auto& n = expr.node(i);
    if (n.kind == ProbabilityExpr::Kind::constant) return format_real(n.value);
    if (n.kind == ProbabilityExpr::Kind::symbol) return arg.at(n.symbol);
    return name_of.at(i);
  };
  std::string body;
  int temp = 0;
  const std::string indent = py ? "    " : "  ";
  for (std::size_t i = 0; i < expr.size(); ++i) {
    const auto& n = expr.node(static_cast<int>(i));
    if (!live[i] || n.lhs < 0) continue;
    std::string t = "t" + std::to_string(++temp);
    const char* op = n.kind == ProbabilityExpr::Kind::add ? " + " : n.kind == ProbabilityExpr::Kind::sub ? " - " : " * ";
    body += indent + t + " = " + operand(n.lhs) + op + operand(n.rhs) + (py ? "\n" : ";\n");
    name_of[static_cast<int>(i)] = t;
  }
  std::string result = expr.root() < 0 ? "0" : operand(expr.root());
  std::string params;
  for (const std::string& s : syms) {
    if (!params.empty()) params += ", ";
    params += arg.at(s);
  }
  std::string out;
  const std::string header = std::string("Generated by safetk ") + SAFETK_VERSION + "; do not edit.";
  if (py) {
    out += "# " + header + "\n";
    out += "# Probability of the top-level event as a function of the basic event probabilities.\n\n\n";
    out += "def tle_probability(" + params + "):\n" + body + "    return " + result + "\n\n\n";
    out += "if __name__ == \"__main__\":\n";
    out += "    import sys\n";
    out += "    print(repr(tle_probability(*[float(a) for a in sys.argv[1:]])))\n";
  } else {
    out += "% " + header + "\n";
    out += "% Probability of the top-level event as a function of the basic event probabilities.\n";
    out += "function r = tle_probability(" + params + ")\n" + body + "  r = " + result + ";\nend\n";
  }
  return out;
}

}  // namespace safetk::ft
