#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsync/random.hpp"
#include "tsync/syncproto.hpp"
#include "tsync/timebase.hpp"

namespace tsync {

enum class TriggerKind { ExternallyTriggered, InternallyTriggered };
enum class SensorInterface { Mipi, SerialPort, Ethernet, Can };
enum class TriggerPath { Hardware, HostSoftware };
enum class StampLocation { AtInterface, AtHost };

/// Interface stamping: 2 us +/- 0.5 us.
StampNoiseModel default_interface_latency();
/// Host stamping: 5 ms base plus Uniform[0.5 ms, 20 ms].
StampNoiseModel default_host_latency();
/// Host-software trigger path; same software stack as host stamping.
StampNoiseModel default_host_trigger_noise();

struct SensorSpec {
  std::string name;
  TriggerKind kind = TriggerKind::ExternallyTriggered;
  std::int64_t rate_hz = 1;
  SensorInterface interface = SensorInterface::Mipi;
  TriggerPath trigger_path = TriggerPath::Hardware;
  StampNoiseModel trigger_path_noise = default_host_trigger_noise();
  StampLocation stamping = StampLocation::AtInterface;
  StampNoiseModel interface_latency = default_interface_latency();
  StampNoiseModel host_latency = default_host_latency();
  /// Free-running oscillator of an internally-triggered sensor. Positive drift
  /// stretches its frame period: sample n lands at the clock's reading of
  /// n nominal periods.
  std::optional<ClockModel> internal_clock;

  /// Throws DomainError if rate_hz < 1, an externally-triggered sensor has an
  /// internal clock or a latency model is invalid.
  void validate() const;

  const StampNoiseModel& stamp_latency() const {
    return stamping == StampLocation::AtInterface ? interface_latency : host_latency;
  }

  bool operator==(const SensorSpec&) const = default;
};

// Sensors characterized by triggering mechanism, stamping location and interface.
SensorSpec camera_spec(std::string name, std::int64_t rate_hz);
SensorSpec imu_spec(std::string name, std::int64_t rate_hz);
/// Stamps internally with its PTP-disciplined clock; modeled as interface stamping.
SensorSpec lidar_spec(std::string name, std::int64_t rate_hz);
SensorSpec radar_spec(std::string name, std::int64_t rate_hz);

/// Shared hardware timer driving all trigger pulses.
struct TimerConfig {
  std::int64_t frequency_hz = 100'000'000;
  /// Delivery latency of a hardware trigger pulse, in timer cycles.
  std::int64_t hardware_trigger_cycles = 3;

  Nanos resolution() const { return kSecond / frequency_hz; }
  /// Throws DomainError unless the frequency divides 1 GHz and cycles >= 0.
  void validate() const;

  bool operator==(const TimerConfig&) const = default;
};

struct RateViolation {
  std::string first;
  std::string second;
  std::int64_t first_rate_hz = 0;
  std::int64_t second_rate_hz = 0;
};

/// For every (internally-, externally-triggered) pair one rate must divide
/// the other; `strict` extends the rule to all pairs. Returns the first
/// violating pair in list order.
std::optional<RateViolation> validate_rates(std::span<const SensorSpec> specs, bool strict = false);

struct ScheduledPulse {
  /// Nominal instant in shared-timer ticks since the schedule start.
  std::int64_t tick = 0;
  TrueTime nominal{};
  TrueTime delivered{};
};

struct SensorPulses {
  std::string sensor;
  std::vector<ScheduledPulse> pulses;
};

struct TriggerSchedule {
  Nanos timer_resolution = 10;
  TrueTime start{};
  Nanos duration = 0;
  /// Parallel to the spec list the schedule was generated from.
  std::vector<SensorPulses> sensors;
};

/// Pulse k of a sensor at `rate_hz` sits at round(k * timer_hz / rate_hz)
/// ticks, so instants shared by several sensors land on one tick value.
std::int64_t nominal_tick(std::int64_t k, std::int64_t timer_hz, std::int64_t rate_hz);

/// Trigger pulses on the shared timer grid for externally-triggered sensors
/// and a single start pulse for internally-triggered ones. Host-path delivery
/// draws from stream "trigger:<sensor>". Throws RateError on bad rates.
TriggerSchedule generate_trigger_events(std::span<const SensorSpec> specs, const TimerConfig& timer,
                                        TrueTime start, Nanos duration, const RngFactory& rng,
                                        bool strict_rates = false);

struct SampleRecord {
  std::uint32_t sensor = 0;
  std::uint64_t seq = 0;
  TrueTime event_true_time{};
  std::optional<LocalTime> stamped_time;
  StampLocation stamping_location = StampLocation::AtInterface;
  bool compensated = false;
};

/// One record per trigger pulse of externally-triggered sensors, and one per
/// free-running frame of internally-triggered sensors inside the schedule
/// window. Records are grouped by sensor, in time order.
std::vector<SampleRecord> emit_samples(const TriggerSchedule& schedule,
                                       std::span<const SensorSpec> specs);

/// Stamps the record `latency` after the event using `node_clock`.
SampleRecord stamp(SampleRecord record, StampLocation location, Nanos latency,
                   const ClockState& node_clock);

/// Draws the latency for `location` from `spec` and stamps.
SampleRecord stamp(SampleRecord record, const SensorSpec& spec, StampLocation location,
                   const ClockState& node_clock, Rng& rng);

/// Subtracts the known deterministic latency. Throws CompensateTwice on a
/// second call and Error on an unstamped record.
SampleRecord compensate(SampleRecord record, Nanos known_base_latency);

/// Stamp minus the reference reading of the event instant.
Nanos stamp_error(const SampleRecord& record, LocalTime reference);

struct SkewSummary {
  std::uint64_t coincident_ticks = 0;
  Nanos max_skew = 0;
};

/// Largest spread of delivered times among sensors sharing a nominal tick,
/// over externally-triggered sensors (or those listed in `only`).
SkewSummary pairwise_trigger_skew(const TriggerSchedule& schedule,
                                  std::span<const SensorSpec> specs,
                                  std::span<const std::uint32_t> only = {});

}  // namespace tsync
