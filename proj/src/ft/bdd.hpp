#pragma once

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

namespace safetk::ft {

// Minimal reduced ordered BDD. Variable indices order the diagram; node 0 is
// FALSE and node 1 is TRUE.
class Bdd {
 public:
  static constexpr int kFalse = 0;
  static constexpr int kTrue = 1;

  Bdd() {
    nodes_.push_back({-1, 0, 0});
    nodes_.push_back({-1, 1, 1});
  }

  int var(int v) { return make(v, kFalse, kTrue); }
  int and_(int a, int b) { return apply(Op::and_, a, b); }
  int or_(int a, int b) { return apply(Op::or_, a, b); }

  int top(int n) const { return nodes_[n].var; }
  int lo(int n) const { return nodes_[n].lo; }
  int hi(int n) const { return nodes_[n].hi; }
  bool terminal(int n) const { return n <= kTrue; }

 private:
  enum class Op { and_, or_ };
  struct Node {
    int var;
    int lo;
    int hi;
  };

  int make(int v, int lo, int hi) {
    if (lo == hi) return lo;
    auto key = std::make_tuple(v, lo, hi);
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    nodes_.push_back({v, lo, hi});
    int id = static_cast<int>(nodes_.size()) - 1;
    unique_.emplace(key, id);
    return id;
  }

  int apply(Op op, int a, int b) {
    if (op == Op::and_) {
      if (a == kFalse || b == kFalse) return kFalse;
      if (a == kTrue) return b;
      if (b == kTrue) return a;
    } else {
      if (a == kTrue || b == kTrue) return kTrue;
      if (a == kFalse) return b;
      if (b == kFalse) return a;
    }
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    auto key = std::make_tuple(static_cast<int>(op), a, b);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    int va = nodes_[a].var;
    int vb = nodes_[b].var;
    int v = std::min(va, vb);
    int a0 = va == v ? nodes_[a].lo : a;
    int a1 = va == v ? nodes_[a].hi : a;
    int b0 = vb == v ? nodes_[b].lo : b;
    int b1 = vb == v ? nodes_[b].hi : b;
    int r = make(v, apply(op, a0, b0), apply(op, a1, b1));
    memo_.emplace(key, r);
    return r;
  }

  std::vector<Node> nodes_;
  std::map<std::tuple<int, int, int>, int> unique_;
  std::map<std::tuple<int, int, int>, int> memo_;
};

}  // namespace safetk::ft
