#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tsync/error.hpp"
#include "golden.hpp"
#include "tsync/simnet.hpp"

using namespace tsync;

namespace {

std::vector<Event> drain(Simulator& sim, TrueTime until) {
  std::vector<Event> seen;
  sim.run_until(until, [&](Simulator&, const Event& e) { seen.push_back(e); });
  return seen;
}

}  // namespace

TEST_CASE("schedule at now fires next, ties pop in insertion order") {
  Simulator sim;
  sim.schedule(TrueTime{5}, SyncTick{2});
  sim.schedule(TrueTime{0}, SyncTick{1});
  sim.schedule(TrueTime{5}, SyncTick{3});
  const auto seen = drain(sim, TrueTime{10});
  REQUIRE(seen.size() == 3);
  CHECK(std::get<SyncTick>(seen[0].payload).slave == 1);
  CHECK(std::get<SyncTick>(seen[1].payload).slave == 2);
  CHECK(std::get<SyncTick>(seen[2].payload).slave == 3);
  CHECK(sim.now() == TrueTime{10});
}

TEST_CASE("scheduling in the past throws") {
  Simulator sim;
  sim.run_until(TrueTime{100}, [](Simulator&, const Event&) {});
  CHECK_THROWS_AS(sim.schedule(TrueTime{99}, SyncTick{}), SchedulingInPast);
  CHECK_NOTHROW(sim.schedule(TrueTime{100}, SyncTick{}));
}

TEST_CASE("empty queue gives an empty trace") {
  Simulator sim;
  CHECK(drain(sim, TrueTime{seconds(1)}).empty());
  CHECK(sim.trace().count == 0);
  CHECK(sim.trace().entries.empty());
}

TEST_CASE("periodic 10 Hz events over 1 s give 10 entries") {
  Simulator sim;
  sim.schedule(TrueTime{0}, SyncTick{});
  sim.run_until(TrueTime{seconds(1) - 1}, [](Simulator& s, const Event& e) {
    s.schedule(e.fire_at + milliseconds(100), SyncTick{});
  });
  CHECK(sim.trace().count == 10);
  CHECK(sim.trace().entries.size() == 10);
  CHECK(sim.trace().entries.back().fire_at == TrueTime{milliseconds(900)});
}

TEST_CASE("handlers may schedule at now; events past t_end stay queued") {
  Simulator sim;
  sim.schedule(TrueTime{10}, SyncTick{0});
  int handled = 0;
  sim.run_until(TrueTime{20}, [&](Simulator& s, const Event& e) {
    ++handled;
    if (std::get<SyncTick>(e.payload).slave == 0) {
      s.schedule(s.now(), SyncTick{1});
      s.schedule(TrueTime{21}, SyncTick{2});
    }
  });
  CHECK(handled == 2);
  CHECK(sim.pending() == 1);
}

TEST_CASE("send over a fixed-delay link") {
  Simulator sim;
  Link link(LinkModel{microseconds(10), microseconds(20), NoJitter{}, 0.0}, Rng(1));
  auto out = sim.send(link, Direction::Forward, SyncTick{}, TrueTime{0});
  REQUIRE(std::holds_alternative<Event>(out));
  CHECK(std::get<Event>(out).fire_at == TrueTime{microseconds(10)});
  out = sim.send(link, Direction::Reverse, SyncTick{}, TrueTime{0});
  CHECK(std::get<Event>(out).fire_at == TrueTime{microseconds(20)});
}

TEST_CASE("send with uniform jitter stays within bounds") {
  Simulator sim;
  Link link(LinkModel{microseconds(10), microseconds(10), UniformJitter{microseconds(5)}, 0.0},
            Rng(7));
  for (int i = 0; i < 10'000; ++i) {
    const auto out = sim.send(link, Direction::Forward, SyncTick{}, TrueTime{0});
    const TrueTime at = std::get<Event>(out).fire_at;
    REQUIRE(at >= TrueTime{microseconds(5)});
    REQUIRE(at <= TrueTime{microseconds(15)});
  }
}

TEST_CASE("drop probability 1 always drops, 0 never does") {
  Simulator sim;
  Link lossy(LinkModel{10, 10, NoJitter{}, 1.0}, Rng(3));
  Link clean(LinkModel{10, 10, NoJitter{}, 0.0}, Rng(3));
  for (int i = 0; i < 1000; ++i) {
    CHECK(std::holds_alternative<Dropped>(sim.send(lossy, Direction::Forward, SyncTick{}, TrueTime{0})));
    CHECK(std::holds_alternative<Event>(sim.send(clean, Direction::Forward, SyncTick{}, TrueTime{0})));
  }
  CHECK(sim.pending() == 1000);
}

TEST_CASE("link model validation") {
  CHECK_THROWS_AS((LinkModel{-1, 0, NoJitter{}, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((LinkModel{0, 0, NoJitter{}, 1.5}.validate()), DomainError);
  CHECK_THROWS_AS((LinkModel{0, 0, UniformRangeJitter{5, 1}, 0.0}.validate()), DomainError);
  CHECK_NOTHROW((LinkModel{0, 0, ExponentialJitter{100}, 0.5}.validate()));
}

TEST_CASE("property: uniform draws are bounded with mean near 0") {
  const std::int64_t w = 1000;
  Rng rng(derive_seed(99, "jitter"));
  const int n = 100'000;
  long double sum = 0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t d = draw(UniformJitter{w}, rng);
    REQUIRE(d >= -w);
    REQUIRE(d <= w);
    sum += d;
  }
  // Discrete uniform on [-w, w]: variance ((2w+1)^2 - 1) / 12.
  const double sigma = std::sqrt((std::pow(2.0 * w + 1, 2) - 1) / 12.0 / n);
  CHECK(std::abs(static_cast<double>(sum / n)) < 3 * sigma);
}

TEST_CASE("exponential draws have the configured mean") {
  Rng rng(5);
  const int n = 100'000;
  long double sum = 0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t d = draw(ExponentialJitter{10'000}, rng);
    REQUIRE(d >= 0);
    sum += d;
  }
  // sigma of the mean = 10'000 / sqrt(n) ~ 32.
  CHECK(std::abs(static_cast<double>(sum / n) - 10'000.0) < 5 * 32.0);
}

TEST_CASE("named streams are independent of each other") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  const RngFactory f(11);
  Rng a1 = f.stream("link:a");
  Rng other = f.stream("link:b");
  other.next();
  Rng a2 = f.stream("link:a");
  for (int i = 0; i < 100; ++i) CHECK(a1.next() == a2.next());
}

TEST_CASE("uniform_int covers the closed range") {
  Rng rng(1);
  bool lo = false, hi = false;
  for (int i = 0; i < 10'000; ++i) {
    const auto v = rng.uniform_int(-2, 2);
    REQUIRE(v >= -2);
    REQUIRE(v <= 2);
    lo |= v == -2;
    hi |= v == 2;
  }
  CHECK(lo);
  CHECK(hi);
  CHECK(rng.uniform_int(4, 4) == 4);
}

namespace {

SimulationTrace random_run(std::uint64_t seed) {
  Simulator sim;
  Link link(LinkModel{microseconds(100), microseconds(120), UniformJitter{microseconds(30)}, 0.1},
            RngFactory(seed).stream("link"));
  sim.schedule(TrueTime{0}, SyncTick{});
  sim.run_until(TrueTime{seconds(2)}, [&](Simulator& s, const Event& e) {
    if (std::holds_alternative<SyncTick>(e.payload)) {
      s.schedule(e.fire_at + milliseconds(10), SyncTick{});
      s.send(link, Direction::Forward, MessageArrival{0, 1, MessageType::Sync, e.sequence, 0},
             e.fire_at);
    }
  });
  return sim.trace();
}

}  // namespace

TEST_CASE("property: equal seeds give identical traces, processed in causal order") {
  for (std::uint64_t seed : {1u, 2u, 3u, 1234u}) {
    const SimulationTrace a = random_run(seed);
    const SimulationTrace b = random_run(seed);
    CHECK(a.hash == b.hash);
    CHECK(a.entries == b.entries);
    for (std::size_t i = 1; i < a.entries.size(); ++i) {
      REQUIRE(a.entries[i - 1].fire_at <= a.entries[i].fire_at);
    }
  }
  CHECK(random_run(1).hash != random_run(2).hash);
}

TEST_CASE("pinned trace hash") {
  // Reference run of random_run(1), recorded once.
  CHECK(random_run(1).hash == TRACE_HASH_SEED1);
}
