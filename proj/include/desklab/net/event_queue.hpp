#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

#include "desklab/common/time.hpp"

namespace desklab::net {

using NodeId = std::uint32_t;

/// Same-time events run faults first, then deliveries, timers, and finally
/// externally injected work (load operations).
enum class Priority : std::uint8_t { fault = 0, delivery = 1, timer = 2, external = 3 };

struct EventKey {
  SimTime time{0};
  Priority priority = Priority::external;
  NodeId node = 0;
  std::uint64_t seq = 0;  // per-node insertion counter

  friend auto operator<=>(const EventKey& a, const EventKey& b) {
    return std::tie(a.time, a.priority, a.node, a.seq) <=> std::tie(b.time, b.priority, b.node, b.seq);
  }
  friend bool operator==(const EventKey&, const EventKey&) = default;
};

/// Min-heap of actions keyed by EventKey. The key is a total order, so the
/// pop sequence depends only on the set of keys pushed.
class EventQueue {
 public:
  using Action = std::function<void()>;

  EventKey push(SimTime time, Priority priority, NodeId node, Action action) {
    if (node >= next_seq_.size()) next_seq_.resize(node + 1, 0);
    const EventKey key{time, priority, node, next_seq_[node]++};
    std::size_t slot;
    if (free_.empty()) {
      slot = actions_.size();
      actions_.push_back(std::move(action));
    } else {
      slot = free_.back();
      free_.pop_back();
      actions_[slot] = std::move(action);
    }
    heap_.push({key, slot});
    return key;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const EventKey& top() const { return heap_.top().key; }

  std::pair<EventKey, Action> pop() {
    const Entry e = heap_.top();
    heap_.pop();
    Action a = std::move(actions_[e.slot]);
    actions_[e.slot] = nullptr;
    free_.push_back(e.slot);
    return {e.key, std::move(a)};
  }

 private:
  struct Entry {
    EventKey key;
    std::size_t slot;
    bool operator>(const Entry& o) const { return key > o.key; }
  };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::vector<Action> actions_;
  std::vector<std::size_t> free_;
  std::vector<std::uint64_t> next_seq_;
};

}  // namespace desklab::net
