#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "safetk/ft/fault_tree.hpp"

// Sum over all truth assignments of the structure function, weighted.
inline double indicator_oracle(const safetk::ft::FaultTree& ft, const safetk::ft::ProbabilityAssignment& pa) {
  std::vector<std::string> syms = ft.basic_events();
  std::map<std::string, std::string> cause_of;
  for (const auto& g : pa.groups) {
    syms.push_back(g.cause);
    for (const auto& m : g.members) cause_of[m] = g.cause;
  }
  std::sort(syms.begin(), syms.end());
  syms.erase(std::unique(syms.begin(), syms.end()), syms.end());
  auto prob = [&](const std::string& s) {
    auto it = pa.p.find(s);
    if (it != pa.p.end()) return it->second;
    for (const auto& g : pa.groups) {
      if (g.cause == s) return g.probability;
    }
    throw std::runtime_error("no probability for " + s);
  };
  double total = 0;
  for (std::uint64_t bits = 0; bits < (1ull << syms.size()); ++bits) {
    std::map<std::string, bool> on;
    double w = 1;
    for (std::size_t i = 0; i < syms.size(); ++i) {
      on[syms[i]] = (bits >> i) & 1;
      w *= on[syms[i]] ? prob(syms[i]) : 1 - prob(syms[i]);
    }
    std::function<bool(const std::string&)> eval = [&](const std::string& id) {
      const safetk::ft::Node* n = ft.find(id);
      if (n->kind == safetk::ft::NodeKind::basic) {
        auto c = cause_of.find(n->event);
        return on[n->event] || (c != cause_of.end() && on[c->second]);
      }
      bool conj = n->kind != safetk::ft::NodeKind::or_;
      bool r = conj;
      for (const auto& k : n->children) r = conj ? (r && eval(k)) : (r || eval(k));
      return r;
    };
    if (eval(ft.root)) total += w;
  }
  return total;
}
