#include "tsync/sensors.hpp"

#include <algorithm>
#include <map>

#include "tsync/error.hpp"

namespace tsync {

StampNoiseModel default_interface_latency() {
  return StampNoiseModel{microseconds(2), UniformJitter{500}};
}

StampNoiseModel default_host_latency() {
  return StampNoiseModel{milliseconds(5), UniformRangeJitter{microseconds(500), milliseconds(20)}};
}

StampNoiseModel default_host_trigger_noise() { return default_host_latency(); }

void SensorSpec::validate() const {
  if (name.empty()) throw DomainError("sensor name must not be empty");
  if (rate_hz < 1) throw DomainError("sensor '" + name + "': rate_hz must be >= 1");
  if (kind == TriggerKind::ExternallyTriggered && internal_clock) {
    throw DomainError("sensor '" + name + "': externally-triggered sensors have no internal clock");
  }
  if (internal_clock) {
    internal_clock->validate();
    if (internal_clock->initial_offset < 0) {
      throw DomainError("sensor '" + name + "': internal clock phase offset must be >= 0");
    }
  }
  trigger_path_noise.validate();
  interface_latency.validate();
  host_latency.validate();
}

SensorSpec camera_spec(std::string name, std::int64_t rate_hz) {
  SensorSpec s;
  s.name = std::move(name);
  s.kind = TriggerKind::ExternallyTriggered;
  s.rate_hz = rate_hz;
  s.interface = SensorInterface::Mipi;
  return s;
}

SensorSpec imu_spec(std::string name, std::int64_t rate_hz) {
  SensorSpec s = camera_spec(std::move(name), rate_hz);
  s.interface = SensorInterface::SerialPort;
  return s;
}

SensorSpec lidar_spec(std::string name, std::int64_t rate_hz) {
  SensorSpec s;
  s.name = std::move(name);
  s.kind = TriggerKind::InternallyTriggered;
  s.rate_hz = rate_hz;
  s.interface = SensorInterface::Ethernet;
  s.internal_clock = ClockModel{};
  return s;
}

SensorSpec radar_spec(std::string name, std::int64_t rate_hz) {
  SensorSpec s = lidar_spec(std::move(name), rate_hz);
  s.interface = SensorInterface::Can;
  return s;
}

void TimerConfig::validate() const {
  if (frequency_hz <= 0 || kSecond % frequency_hz != 0) {
    throw DomainError("timer frequency must divide 1 GHz");
  }
  if (hardware_trigger_cycles < 0) throw DomainError("hardware trigger cycles must be >= 0");
}

std::optional<RateViolation> validate_rates(std::span<const SensorSpec> specs, bool strict) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      const auto& a = specs[i];
      const auto& b = specs[j];
      if (!strict && a.kind == b.kind) continue;
      const bool divisible = a.rate_hz % b.rate_hz == 0 || b.rate_hz % a.rate_hz == 0;
      if (!divisible) return RateViolation{a.name, b.name, a.rate_hz, b.rate_hz};
    }
  }
  return std::nullopt;
}

std::int64_t nominal_tick(std::int64_t k, std::int64_t timer_hz, std::int64_t rate_hz) {
  return div_round_half_away(static_cast<__int128>(k) * timer_hz, rate_hz);
}

TriggerSchedule generate_trigger_events(std::span<const SensorSpec> specs, const TimerConfig& timer,
                                        TrueTime start, Nanos duration, const RngFactory& rng,
                                        bool strict_rates) {
  timer.validate();
  for (const auto& s : specs) s.validate();
  if (const auto bad = validate_rates(specs, strict_rates)) {
    throw RateError("", bad->first, bad->second,
                    "sensor rates " + std::to_string(bad->first_rate_hz) + " Hz ('" + bad->first +
                        "') and " + std::to_string(bad->second_rate_hz) + " Hz ('" + bad->second +
                        "') are not divisible");
  }

  TriggerSchedule schedule;
  schedule.timer_resolution = timer.resolution();
  schedule.start = start;
  schedule.duration = duration;
  const Nanos hardware_latency = timer.hardware_trigger_cycles * schedule.timer_resolution;

  for (const auto& spec : specs) {
    SensorPulses out;
    out.sensor = spec.name;
    Rng path_rng = rng.stream("trigger:" + spec.name);
    const bool host_path = spec.kind == TriggerKind::ExternallyTriggered &&
                           spec.trigger_path == TriggerPath::HostSoftware;
    const auto deliver = [&](std::int64_t tick) {
      ScheduledPulse p;
      p.tick = tick;
      p.nominal = start + tick * schedule.timer_resolution;
      p.delivered = p.nominal + (host_path ? spec.trigger_path_noise.draw_latency(path_rng)
                                           : hardware_latency);
      out.pulses.push_back(p);
    };
    if (spec.kind == TriggerKind::InternallyTriggered) {
      deliver(0);
    } else {
      for (std::int64_t k = 0;; ++k) {
        const std::int64_t tick = nominal_tick(k, timer.frequency_hz, spec.rate_hz);
        if (tick * schedule.timer_resolution >= duration) break;
        deliver(tick);
      }
    }
    schedule.sensors.push_back(std::move(out));
  }
  return schedule;
}

std::vector<SampleRecord> emit_samples(const TriggerSchedule& schedule,
                                       std::span<const SensorSpec> specs) {
  if (specs.size() != schedule.sensors.size()) {
    throw DomainError("schedule and sensor list differ in length");
  }
  std::vector<SampleRecord> records;
  const TrueTime end = schedule.start + schedule.duration;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const auto& pulses = schedule.sensors[i].pulses;
    const auto sensor = static_cast<std::uint32_t>(i);
    if (spec.kind == TriggerKind::ExternallyTriggered) {
      for (std::size_t k = 0; k < pulses.size(); ++k) {
        SampleRecord r;
        r.sensor = sensor;
        r.seq = k;
        r.event_true_time = pulses[k].delivered;
        r.stamping_location = spec.stamping;
        records.push_back(r);
      }
      continue;
    }
    if (pulses.empty()) continue;
    const TrueTime started = pulses.front().delivered;
    const ClockState oscillator = make_clock(spec.internal_clock.value_or(ClockModel{}));
    for (std::uint64_t n = 0;; ++n) {
      const Nanos nominal =
          div_round_half_away(static_cast<__int128>(n) * kSecond, spec.rate_hz);
      const Nanos elapsed = local_from_true_noiseless(oscillator, TrueTime{nominal}).ns;
      const TrueTime at = started + elapsed;
      if (at >= end) break;
      SampleRecord r;
      r.sensor = sensor;
      r.seq = n;
      r.event_true_time = at;
      r.stamping_location = spec.stamping;
      records.push_back(r);
    }
  }
  return records;
}

SampleRecord stamp(SampleRecord record, StampLocation location, Nanos latency,
                   const ClockState& node_clock) {
  if (record.stamped_time) throw Error("sample record is already stamped");
  if (latency < 0) throw DomainError("stamping latency must be >= 0");
  record.stamping_location = location;
  record.stamped_time = local_from_true(node_clock, record.event_true_time + latency);
  return record;
}

SampleRecord stamp(SampleRecord record, const SensorSpec& spec, StampLocation location,
                   const ClockState& node_clock, Rng& rng) {
  const auto& model =
      location == StampLocation::AtInterface ? spec.interface_latency : spec.host_latency;
  return stamp(std::move(record), location, model.draw_latency(rng), node_clock);
}

SampleRecord compensate(SampleRecord record, Nanos known_base_latency) {
  if (!record.stamped_time) throw Error("cannot compensate an unstamped sample record");
  if (record.compensated) throw CompensateTwice("sample record is already compensated");
  *record.stamped_time = *record.stamped_time - known_base_latency;
  record.compensated = true;
  return record;
}

Nanos stamp_error(const SampleRecord& record, LocalTime reference) {
  if (!record.stamped_time) throw Error("sample record is not stamped");
  return *record.stamped_time - reference;
}

SkewSummary pairwise_trigger_skew(const TriggerSchedule& schedule,
                                  std::span<const SensorSpec> specs,
                                  std::span<const std::uint32_t> only) {
  std::map<std::int64_t, std::pair<TrueTime, TrueTime>> spread;
  std::map<std::int64_t, int> members;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const bool selected = only.empty()
                              ? specs[i].kind == TriggerKind::ExternallyTriggered
                              : std::find(only.begin(), only.end(), i) != only.end();
    if (!selected) continue;
    for (const auto& p : schedule.sensors.at(i).pulses) {
      auto [it, inserted] = spread.try_emplace(p.tick, p.delivered, p.delivered);
      if (!inserted) {
        it->second.first = std::min(it->second.first, p.delivered);
        it->second.second = std::max(it->second.second, p.delivered);
      }
      ++members[p.tick];
    }
  }
  SkewSummary out;
  for (const auto& [tick, range] : spread) {
    if (members[tick] < 2) continue;
    ++out.coincident_ticks;
    out.max_skew = std::max(out.max_skew, range.second - range.first);
  }
  return out;
}

}  // namespace tsync
