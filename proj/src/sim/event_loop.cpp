#include "ranslice/sim/event_loop.hpp"

namespace ranslice::sim {

EventId EventLoop::schedule_at(Millis at, std::function<void()> fn, int priority) {
  EventId id = next_id_++;
  queue_.push({std::max(at, now_), priority, id});
  handlers_.emplace(id, std::move(fn));
  return id;
}

bool EventLoop::step() {
  while (!queue_.empty()) {
    auto e = queue_.top();
    queue_.pop();
    auto it = handlers_.find(e.id);
    if (it == handlers_.end()) continue;
    auto fn = std::move(it->second);
    handlers_.erase(it);
    now_ = e.at;
    ++fired_;
    fn();
    return true;
  }
  return false;
}

void EventLoop::run_until(Millis until) {
  while (!queue_.empty()) {
    auto e = queue_.top();
    if (e.at > until) break;
    if (!handlers_.count(e.id)) {
      queue_.pop();
      continue;
    }
    step();
  }
  if (until > now_) now_ = until;
}

}  // namespace ranslice::sim
