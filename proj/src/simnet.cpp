#include "tsync/simnet.hpp"

#include <array>
#include <cmath>
#include <string>

#include "tsync/error.hpp"
#include "tsync/overloaded.hpp"

namespace tsync {

TraceEntry trace_entry(const Event& event) {
  TraceEntry entry;
  entry.fire_at = event.fire_at;
  entry.sequence = event.sequence;
  entry.kind = static_cast<std::uint8_t>(event.payload.index());
  std::visit(Overloaded{
                 [&](const MessageArrival& m) {
                   entry.a = (static_cast<std::int64_t>(m.from) << 32) | m.to;
                   entry.b = (static_cast<std::int64_t>(m.exchange) << 8) |
                             static_cast<std::int64_t>(m.type);
                   entry.c = m.carried;
                 },
                 [&](const SyncTick& s) { entry.a = s.slave; },
                 [&](const DelayReqDue& d) {
                   entry.a = d.slave;
                   entry.b = static_cast<std::int64_t>(d.exchange);
                 },
                 [&](const TriggerPulse& p) {
                   entry.a = p.machine;
                   entry.b = p.sensor;
                   entry.c = p.tick;
                 },
                 [&](const SensorSample& s) {
                   entry.a = s.machine;
                   entry.b = s.sensor;
                   entry.c = static_cast<std::int64_t>(s.seq);
                 },
             },
             event.payload);
  return entry;
}

namespace {

void hash_word(std::uint64_t& h, std::uint64_t word) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<char>((word >> (8 * i)) & 0xffU);
  }
  h = fnv1a(std::string_view(bytes.data(), bytes.size()), h);
}

void fold(SimulationTrace& trace, const TraceEntry& e) {
  hash_word(trace.hash, static_cast<std::uint64_t>(e.fire_at.ns));
  hash_word(trace.hash, e.sequence);
  hash_word(trace.hash, e.kind);
  hash_word(trace.hash, static_cast<std::uint64_t>(e.a));
  hash_word(trace.hash, static_cast<std::uint64_t>(e.b));
  hash_word(trace.hash, static_cast<std::uint64_t>(e.c));
  ++trace.count;
}

}  // namespace

void LinkModel::validate() const {
  if (forward_delay < 0 || reverse_delay < 0) throw DomainError("link delays must be >= 0");
  tsync::validate(jitter);
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
    throw DomainError("drop probability must lie in [0, 1]");
  }
}

Link::Link(LinkModel model, Rng rng) : model_(std::move(model)), rng_(rng) {
  model_.validate();
}

std::optional<Nanos> Link::transmit(Direction direction) {
  const double u = rng_.uniform01();
  const Nanos jitter = draw(model_.jitter, rng_);
  if (u < model_.drop_probability || model_.drop_probability >= 1.0) return std::nullopt;
  const Nanos base =
      direction == Direction::Forward ? model_.forward_delay : model_.reverse_delay;
  // Jitter is additive but the total delay never goes below zero.
  return std::max<Nanos>(0, base + jitter);
}

Event Simulator::schedule(TrueTime fire_at, Payload payload) {
  if (fire_at < now_) {
    throw SchedulingInPast("event scheduled at " + std::to_string(fire_at.ns) +
                           " ns, before current time " + std::to_string(now_.ns) + " ns");
  }
  Event event{fire_at, next_sequence_++, std::move(payload)};
  queue_.push(event);
  return event;
}

SendOutcome Simulator::send(Link& link, Direction direction, Payload payload, TrueTime at) {
  const auto delay = link.transmit(direction);
  if (!delay) return Dropped{};
  return schedule(at + *delay, std::move(payload));
}

void Simulator::run_until(TrueTime t_end, const Handler& handler) {
  while (!queue_.empty() && queue_.top().fire_at <= t_end) {
    Event event = queue_.top();
    queue_.pop();
    now_ = event.fire_at;
    const TraceEntry entry = trace_entry(event);
    fold(trace_, entry);
    if (record_entries_) trace_.entries.push_back(entry);
    if (handler) handler(*this, event);
  }
  if (t_end > now_) now_ = t_end;
}

}  // namespace tsync
