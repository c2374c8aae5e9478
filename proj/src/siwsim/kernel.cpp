#include "siwsim/kernel.hpp"

#include <string>
#include <utility>

namespace siwsim::sim {

EventId Scheduler::at(Time t, std::function<void()> fn) {
  if (t < now_) {
    throw RuntimeFailure("event scheduled in the past (t=" + std::to_string(t) +
                         " now=" + std::to_string(now_) + ")");
  }
  EventId id = next_id_++;
  heap_.push(Entry{t, id, std::move(fn)});
  pending_.insert(id);
  return id;
}

void Scheduler::cancel(EventId id) { pending_.erase(id); }

void Scheduler::purge_cancelled() {
  while (!heap_.empty() && !pending_.contains(heap_.top().id)) {
    heap_.pop();
  }
}

void Scheduler::execute_top() {
  // priority_queue::top is const; the entry is moved out via const_cast,
  // which is safe because pop() follows immediately.
  Entry entry = std::move(const_cast<Entry&>(heap_.top()));
  heap_.pop();
  pending_.erase(entry.id);
  now_ = entry.time;
  ++executed_;
  entry.fn();
}

bool Scheduler::step() {
  purge_cancelled();
  if (heap_.empty()) return false;
  execute_top();
  return true;
}

void Scheduler::run_until(Time t_end) {
  for (;;) {
    purge_cancelled();
    if (heap_.empty() || heap_.top().time > t_end) break;
    execute_top();
  }
  if (t_end > now_) {
    now_ = t_end;
  }
}

}  // namespace siwsim::sim
