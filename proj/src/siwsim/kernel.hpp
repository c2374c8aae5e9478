#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "siwsim/errors.hpp"

namespace siwsim::sim {

// Simulation time in seconds.
using Time = double;

using EventId = std::uint64_t;

// Discrete-event scheduler. Events fire in (time, insertion order); handlers
// may schedule and cancel freely while running. Single-threaded by design:
// event execution order is the reproducibility contract, so all randomness
// and state changes happen on this one timeline.
class Scheduler {
 public:
  Time now() const { return now_; }

  // Schedules fn at absolute time t (t >= now).
  EventId at(Time t, std::function<void()> fn);
  // Schedules fn dt seconds from now (dt >= 0).
  EventId after(Time dt, std::function<void()> fn) { return at(now_ + dt, fn); }

  // Lazy cancellation: the heap entry stays, the handler never runs.
  void cancel(EventId id);
  bool pending(EventId id) const { return pending_.contains(id); }

  // Runs every event with time <= t_end, then advances the clock to t_end.
  void run_until(Time t_end);
  // Executes the single next event. Returns false when none are pending.
  bool step();

  std::size_t executed_count() const { return executed_; }
  bool empty() const { return pending_.empty(); }

 private:
  struct Entry {
    Time time;
    EventId id;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.id > b.id;
    }
  };

  void purge_cancelled();
  void execute_top();

  Time now_ = 0.0;
  EventId next_id_ = 1;
  std::size_t executed_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::unordered_set<EventId> pending_;
};

}  // namespace siwsim::sim
