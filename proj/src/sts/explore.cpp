#include "safetk/sts/explore.hpp"

#include <algorithm>
#include <deque>

#include "safetk/diagnostics.hpp"

namespace safetk::sts {

StateStore::StateStore(std::size_t width, StateCap cap)
    : width_(width), cap_(cap), index_(64, Hash{this}, Equal{this}) {}

std::size_t StateStore::hash_view(StateView s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::int32_t v : s) {
    h ^= static_cast<std::uint32_t>(v);
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

std::size_t StateStore::Hash::operator()(std::uint32_t id) const { return hash_view((*store)[id]); }

bool StateStore::Equal::operator()(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return true;
  StateView x = (*store)[a];
  StateView y = (*store)[b];
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

std::optional<std::uint32_t> StateStore::find(StateView s) {
  buffer_.insert(buffer_.end(), s.begin(), s.end());
  auto it = index_.find(static_cast<std::uint32_t>(count_));
  buffer_.resize(count_ * width_);
  if (it == index_.end()) return std::nullopt;
  return *it;
}

std::pair<std::uint32_t, bool> StateStore::insert(StateView s) {
  buffer_.insert(buffer_.end(), s.begin(), s.end());
  auto id = static_cast<std::uint32_t>(count_);
  auto it = index_.find(id);
  if (it != index_.end()) {
    buffer_.resize(count_ * width_);
    return {*it, false};
  }
  if (count_ >= cap_.max_states) {
    buffer_.resize(count_ * width_);
    throw ResourceError("state cap exceeded: more than " + std::to_string(cap_.max_states) + " states");
  }
  ++count_;
  index_.insert(id);
  return {id, true};
}

std::optional<Trace> reach(const TypedModel& model, const Expr& target, std::optional<std::size_t> bound,
                           StateCap cap) {
  return reach(model, model.compile_state_predicate(target), bound, cap);
}

std::optional<Trace> reach(const TypedModel& model, const Program& target, std::optional<std::size_t> bound,
                           StateCap cap) {
  StateStore store(model.num_vars(), cap);
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> depth;
  std::deque<std::uint32_t> queue;
  auto trace_to = [&](std::uint32_t id) {
    Trace t;
    for (;;) {
      t.emplace_back(store[id].begin(), store[id].end());
      if (parent[id] == id) break;
      id = parent[id];
    }
    std::reverse(t.begin(), t.end());
    return t;
  };
  for (const State& s : model.initial_states()) {
    auto [id, fresh] = store.insert(s);
    if (!fresh) continue;
    parent.push_back(id);
    depth.push_back(0);
    if (model.holds(target, s)) return trace_to(id);
    queue.push_back(id);
  }
  while (!queue.empty()) {
    std::uint32_t id = queue.front();
    queue.pop_front();
    if (bound && depth[id] >= *bound) continue;
    State cur(store[id].begin(), store[id].end());
    for (const State& t : model.successors(cur)) {
      auto [tid, fresh] = store.insert(t);
      if (!fresh) continue;
      parent.push_back(id);
      depth.push_back(depth[id] + 1);
      if (model.holds(target, t)) return trace_to(tid);
      queue.push_back(tid);
    }
  }
  return std::nullopt;
}

StateGraph::StateGraph(const TypedModel& model, std::optional<std::size_t> bound, StateCap cap)
    : model_(model), store_(model.num_vars(), cap) {
  for (const State& s : model.initial_states()) {
    auto [id, fresh] = store_.insert(s);
    if (fresh) {
      initial_.push_back(id);
      depth_.push_back(0);
    }
  }
  offsets_.push_back(0);
  // Ids are assigned in BFS order, so processing ids sequentially is a BFS.
  for (std::uint32_t id = 0; id < store_.size(); ++id) {
    if (bound && depth_[id] >= *bound) {
      if (!truncated_ && !model.successors(store_[id]).empty()) truncated_ = true;
      offsets_.push_back(static_cast<std::uint32_t>(targets_.size()));
      continue;
    }
    State cur(store_[id].begin(), store_[id].end());
    for (const State& t : model.successors(cur)) {
      auto [tid, fresh] = store_.insert(t);
      if (fresh) depth_.push_back(depth_[id] + 1);
      targets_.push_back(tid);
    }
    offsets_.push_back(static_cast<std::uint32_t>(targets_.size()));
  }
}

}  // namespace safetk::sts
