#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "tsync/random.hpp"
#include "tsync/timebase.hpp"

namespace tsync {

using NodeId = std::uint32_t;

enum class MessageType : std::uint8_t { Sync, FollowUp, DelayReq, DelayResp };

/// A protocol message reaching its destination. `carried` holds the precise
/// timestamp transported by Follow_Up (t1) and Delay_Resp (t4).
struct MessageArrival {
  NodeId from = 0;
  NodeId to = 0;
  MessageType type = MessageType::Sync;
  std::uint64_t exchange = 0;
  std::int64_t carried = 0;
};

/// Start of a sync round for one slave.
struct SyncTick {
  NodeId slave = 0;
};

/// Slave-side deadline for sending Delay_Req within an exchange.
struct DelayReqDue {
  NodeId slave = 0;
  std::uint64_t exchange = 0;
};

/// A trigger pulse delivered to a sensor.
struct TriggerPulse {
  NodeId machine = 0;
  std::uint32_t sensor = 0;
  std::int64_t tick = 0;
};

/// A sensor sample reaching its stamping point.
struct SensorSample {
  NodeId machine = 0;
  std::uint32_t sensor = 0;
  std::uint64_t seq = 0;
};

using Payload = std::variant<MessageArrival, SyncTick, DelayReqDue, TriggerPulse, SensorSample>;

struct Event {
  TrueTime fire_at{};
  std::uint64_t sequence = 0;
  Payload payload;
};

/// Compact record of one processed event.
struct TraceEntry {
  TrueTime fire_at{};
  std::uint64_t sequence = 0;
  std::uint8_t kind = 0;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;

  bool operator==(const TraceEntry&) const = default;
};

struct SimulationTrace {
  std::vector<TraceEntry> entries;
  std::uint64_t count = 0;
  /// FNV-1a over every processed event, in processing order.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
};

TraceEntry trace_entry(const Event& event);

enum class Direction { Forward, Reverse };

struct LinkModel {
  Nanos forward_delay = 0;
  Nanos reverse_delay = 0;
  Jitter jitter = NoJitter{};
  double drop_probability = 0.0;

  /// Throws DomainError on negative delays, bad jitter or drop outside [0, 1].
  void validate() const;

  bool operator==(const LinkModel&) const = default;
};

/// A link instance: its model plus its own random stream. Every
/// transmission consumes the same number of draws whatever the outcome.
class Link {
 public:
  Link(LinkModel model, Rng rng);

  /// One-way delay for a message, or nullopt when it is dropped.
  std::optional<Nanos> transmit(Direction direction);

  const LinkModel& model() const noexcept { return model_; }

 private:
  LinkModel model_;
  Rng rng_;
};

struct Dropped {};
using SendOutcome = std::variant<Event, Dropped>;

class Simulator {
 public:
  using Handler = std::function<void(Simulator&, const Event&)>;

  TrueTime now() const noexcept { return now_; }

  /// Throws SchedulingInPast when fire_at < now().
  Event schedule(TrueTime fire_at, Payload payload);

  /// Sends `payload` over `link`; the arrival is scheduled unless dropped.
  SendOutcome send(Link& link, Direction direction, Payload payload, TrueTime at);

  /// Processes every event with fire_at <= t_end in (fire_at, sequence)
  /// order and advances now() to t_end.
  void run_until(TrueTime t_end, const Handler& handler);

  bool empty() const noexcept { return queue_.empty(); }
  std::size_t pending() const noexcept { return queue_.size(); }

  /// Keep per-event entries in the trace (the hash and count are always kept).
  void set_record_entries(bool record) { record_entries_ = record; }
  const SimulationTrace& trace() const noexcept { return trace_; }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      if (x.fire_at != y.fire_at) return x.fire_at > y.fire_at;
      return x.sequence > y.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  TrueTime now_{};
  std::uint64_t next_sequence_ = 0;
  bool record_entries_ = true;
  SimulationTrace trace_;
};

}  // namespace tsync
