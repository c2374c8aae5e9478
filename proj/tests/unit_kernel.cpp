#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "siwsim/kernel.hpp"
#include "siwsim/rng.hpp"

using siwsim::RngStream;
using siwsim::StreamId;
using siwsim::sim::EventId;
using siwsim::sim::Scheduler;
using siwsim::sim::Time;

TEST_CASE("events fire in time order, insertion order on ties") {
  Scheduler s;
  std::vector<std::string> log;
  s.at(2.0, [&] { log.push_back("c"); });
  s.at(1.0, [&] { log.push_back("a"); });
  s.at(1.0, [&] { log.push_back("b"); });
  s.run_until(10.0);
  CHECK(log == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.now() == 10.0);
  CHECK(s.executed_count() == 3);
}

TEST_CASE("clock advances to each event time and then to the horizon") {
  Scheduler s;
  std::vector<Time> stamps;
  s.at(0.5, [&] { stamps.push_back(s.now()); });
  s.at(1.5, [&] { stamps.push_back(s.now()); });
  s.run_until(1.0);
  CHECK(stamps == std::vector<Time>{0.5});
  CHECK(s.now() == 1.0);
  s.run_until(2.0);
  CHECK(stamps == std::vector<Time>{0.5, 1.5});
  CHECK(s.now() == 2.0);
}

TEST_CASE("cancellation is exact and cheap") {
  Scheduler s;
  int fired = 0;
  EventId a = s.at(1.0, [&] { ++fired; });
  EventId b = s.at(2.0, [&] { ++fired; });
  CHECK(s.pending(a));
  CHECK(s.pending(b));
  s.cancel(a);
  CHECK_FALSE(s.pending(a));
  s.run_until(5.0);
  CHECK(fired == 1);
  CHECK_FALSE(s.pending(b));
  s.cancel(b);  // cancelling a finished event is a no-op
}

TEST_CASE("a cancelled head does not pull later events inside the horizon") {
  Scheduler s;
  int fired = 0;
  EventId a = s.at(1.0, [&] { ++fired; });
  s.at(3.0, [&] { ++fired; });
  s.cancel(a);
  s.run_until(2.0);
  CHECK(fired == 0);
  CHECK(s.now() == 2.0);
  s.run_until(3.0);
  CHECK(fired == 1);
}

TEST_CASE("handlers schedule and cancel re-entrantly") {
  Scheduler s;
  std::vector<std::string> log;
  EventId victim = s.at(2.0, [&] { log.push_back("victim"); });
  s.at(1.0, [&] {
    log.push_back("first");
    s.cancel(victim);
    s.after(0.0, [&] { log.push_back("same-time"); });
    s.at(s.now() + 2.0, [&] { log.push_back("later"); });
  });
  s.run_until(10.0);
  CHECK(log == std::vector<std::string>{"first", "same-time", "later"});
}

TEST_CASE("an event scheduled at the horizon during the run still fires") {
  Scheduler s;
  int fired = 0;
  s.at(1.0, [&] { s.at(2.0, [&] { ++fired; }); });
  s.run_until(2.0);
  CHECK(fired == 1);
}

TEST_CASE("scheduling in the past is an error") {
  Scheduler s;
  s.at(1.0, [] {});
  s.run_until(5.0);
  CHECK_THROWS_AS(s.at(4.0, [] {}), siwsim::RuntimeFailure);
  CHECK_NOTHROW(s.at(5.0, [] {}));
}

TEST_CASE("step executes exactly one live event") {
  Scheduler s;
  int fired = 0;
  EventId a = s.at(1.0, [&] { ++fired; });
  s.at(2.0, [&] { ++fired; });
  s.cancel(a);
  CHECK(s.step());
  CHECK(fired == 1);
  CHECK(s.now() == 2.0);
  CHECK_FALSE(s.step());
}

TEST_CASE("random workload executes in nondecreasing time order") {
  Scheduler s;
  RngStream rng(42, StreamId::mac);
  std::vector<Time> order;
  std::vector<EventId> ids;
  for (int i = 0; i < 10000; ++i) {
    Time t = rng.uniform(0.0, 100.0);
    ids.push_back(s.at(t, [&order, &s] { order.push_back(s.now()); }));
  }
  for (int i = 0; i < 10000; i += 7) {
    s.cancel(ids[i]);
  }
  s.run_until(100.0);
  CHECK(order.size() == 10000 - (10000 + 6) / 7);
  for (std::size_t i = 1; i < order.size(); ++i) {
    CHECK(order[i - 1] <= order[i]);
  }
}

TEST_CASE("identical seeds give identical streams") {
  RngStream a(7, StreamId::mobility);
  RngStream b(7, StreamId::mobility);
  RngStream c(7, StreamId::traffic);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t va = a.raw();
    all_equal = all_equal && va == b.raw();
    any_diff = any_diff || va != c.raw();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform helpers stay in range") {
  RngStream rng(123456789, StreamId::traffic);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = rng.uniform(8.0, 14.0);
    CHECK(v >= 8.0);
    CHECK(v < 14.0);
    std::uint64_t n = rng.uniform_int(15);
    CHECK(n < 15);
  }
  CHECK_THROWS_AS(rng.uniform_int(0), siwsim::RuntimeFailure);
}

TEST_CASE("uniform_int covers every residue") {
  RngStream rng(99, StreamId::mac);
  std::vector<int> seen(8, 0);
  for (int i = 0; i < 4000; ++i) {
    ++seen[rng.uniform_int(8)];
  }
  for (int count : seen) {
    CHECK(count > 300);  // ~500 expected per bucket
  }
}
