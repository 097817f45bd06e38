#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "safetk/sts/typed_model.hpp"

namespace safetk::sts {

/// Hash-deduplicated storage of fixed-width states. Ids are dense and
/// assigned in insertion order.
class StateStore {
 public:
  explicit StateStore(std::size_t width, StateCap cap = {});
  StateStore(const StateStore&) = delete;
  StateStore& operator=(const StateStore&) = delete;

  /// Returns (id, inserted). Throws ResourceError past the cap.
  std::pair<std::uint32_t, bool> insert(StateView s);
  std::optional<std::uint32_t> find(StateView s);
  StateView operator[](std::uint32_t id) const {
    return StateView(buffer_.data() + static_cast<std::size_t>(id) * width_, width_);
  }
  std::size_t size() const { return count_; }
  std::size_t width() const { return width_; }

 private:
  // Both functors read the states out of `buffer_`; a candidate is probed by
  // appending it as the next (not yet counted) id.
  struct Hash {
    const StateStore* store;
    std::size_t operator()(std::uint32_t id) const;
  };
  struct Equal {
    const StateStore* store;
    bool operator()(std::uint32_t a, std::uint32_t b) const;
  };
  static std::size_t hash_view(StateView s);

  std::size_t width_;
  StateCap cap_;
  std::size_t count_ = 0;
  std::vector<std::int32_t> buffer_;
  std::unordered_set<std::uint32_t, Hash, Equal> index_;
};

/// Shortest trace from an initial state to a state satisfying `target`, or
/// nullopt. `bound` limits the number of steps (trace length <= bound + 1).
std::optional<Trace> reach(const TypedModel& model, const Expr& target,
                           std::optional<std::size_t> bound = std::nullopt, StateCap cap = {});
std::optional<Trace> reach(const TypedModel& model, const Program& target,
                           std::optional<std::size_t> bound = std::nullopt, StateCap cap = {});

/// The reachable state graph in compressed sparse row form. State ids follow
/// breadth-first discovery order; `depth[id]` is the BFS distance.
class StateGraph {
 public:
  StateGraph(const TypedModel& model, std::optional<std::size_t> bound = std::nullopt,
             StateCap cap = {});

  const TypedModel& model() const { return model_; }
  std::size_t size() const { return store_.size(); }
  StateView state(std::uint32_t id) const { return store_[id]; }
  const std::vector<std::uint32_t>& initial() const { return initial_; }
  std::span<const std::uint32_t> successors(std::uint32_t id) const {
    return {targets_.data() + offsets_[id], targets_.data() + offsets_[id + 1]};
  }
  std::uint32_t depth(std::uint32_t id) const { return depth_[id]; }
  /// True when some state at the bound still had unexplored successors.
  bool truncated() const { return truncated_; }

 private:
  const TypedModel& model_;
  StateStore store_;
  std::vector<std::uint32_t> initial_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<std::uint32_t> depth_;
  bool truncated_ = false;
};

}  // namespace safetk::sts
