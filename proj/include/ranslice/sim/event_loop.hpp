#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "ranslice/common/ids.hpp"

namespace ranslice::sim {

using EventId = std::uint64_t;

/// Single-threaded simulated-time event queue. Events fire in (time,
/// priority, insertion) order, so equal inputs always replay identically.
class EventLoop {
 public:
  Millis now() const { return now_; }

  EventId schedule_at(Millis at, std::function<void()> fn, int priority = 0);
  EventId schedule(Millis delay, std::function<void()> fn, int priority = 0) {
    return schedule_at(now_ + std::max<Millis>(delay, 0), std::move(fn), priority);
  }
  void cancel(EventId id) { handlers_.erase(id); }

  /// Fires every event scheduled at or before `until`, then parks the clock
  /// at `until`.
  void run_until(Millis until);
  /// Fires the next event; false when the queue is empty.
  bool step();
  std::size_t pending() const { return handlers_.size(); }
  std::uint64_t fired() const { return fired_; }

 private:
  struct Entry {
    Millis at;
    int priority;
    EventId id;
    bool operator>(const Entry& o) const {
      if (at != o.at) return at > o.at;
      if (priority != o.priority) return priority > o.priority;
      return id > o.id;
    }
  };

  Millis now_ = 0;
  EventId next_id_ = 1;
  std::uint64_t fired_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::unordered_map<EventId, std::function<void()>> handlers_;
};

}  // namespace ranslice::sim
