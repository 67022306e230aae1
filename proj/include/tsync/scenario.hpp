#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsync/impact.hpp"
#include "tsync/sensors.hpp"
#include "tsync/syncproto.hpp"

namespace tsync {

inline constexpr int kConfigSchema = 1;

struct SensorConfig {
  /// Preset the sensor was built from: camera, imu, lidar, radar or custom.
  std::string preset = "custom";
  SensorSpec spec;
  /// Subtract the known base stamping latency from each stamp.
  bool compensate = true;

  bool operator==(const SensorConfig&) const = default;
};

struct MachineConfig {
  std::string name;
  ClockModel clock;
  std::vector<SensorConfig> sensors;

  bool operator==(const MachineConfig&) const = default;
};

/// Link from the grandmaster (`from`) to a machine (`to`).
struct LinkConfig {
  std::string from;
  std::string to;
  LinkModel model;

  bool operator==(const LinkConfig&) const = default;
};

struct ToleranceSweep {
  std::vector<double> velocities_mps;
  std::vector<double> iou_thresholds;
  double object_length_m = kDefaultObjectLength;

  bool operator==(const ToleranceSweep&) const = default;
};

struct ImpactConfig {
  std::vector<ToleranceSweep> tolerance;
  std::vector<SpeedObservation> speed_observations;
};

struct ScenarioConfig {
  int schema = kConfigSchema;
  std::uint64_t seed = 1;
  Nanos duration = seconds(300);
  /// Offset-error samples before this instant are excluded from the
  /// steady-state statistics.
  Nanos warmup = seconds(100);
  std::string grandmaster_name = "gps";
  GrandmasterSource grandmaster;
  ProtocolConfig protocol;
  TimerConfig timer;
  bool strict_rates = false;
  std::vector<MachineConfig> machines;
  std::vector<LinkConfig> links;
  ImpactConfig impact;
};

/// Parses and validates a JSON scenario document; every omitted field gets
/// its default. Throws ConfigError with the path of the offending field.
ScenarioConfig parse_config(std::string_view document);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Checks a programmatically built configuration the same way parse_config
/// does. Throws ConfigError.
void validate_config(const ScenarioConfig& config);

/// Full effective configuration as pretty-printed JSON. parse_config of the
/// output yields the same configuration.
std::string config_to_json(const ScenarioConfig& config);

/// Sync topology described by a scenario (grandmaster first, then machines).
SyncTopology topology_of(const ScenarioConfig& config);

/// Statistics over a signed series; percentiles are nearest-rank over |x|.
struct SummaryStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double mean_abs = 0.0;
  Nanos p50_abs = 0;
  Nanos p95_abs = 0;
  Nanos max_abs = 0;
};

SummaryStats summarize(std::span<const Nanos> values);

/// Nearest-rank percentile (p in (0, 1]) of |values|.
Nanos percentile_abs(std::span<const Nanos> values, double p);

struct SensorReport {
  std::string name;
  std::uint64_t samples = 0;
  /// Delivered minus nominal trigger instant.
  SummaryStats trigger_latency;
  /// Final stamp minus the grandmaster-timescale reading of the event.
  SummaryStats stamp_residual;
  /// Residuals of events at or after the warmup.
  SummaryStats steady_stamp_residual;
  /// Stamped records in sequence order, with their residuals alongside.
  std::vector<SampleRecord> records;
  std::vector<Nanos> residuals;
};

struct MachineReport {
  std::string name;
  SlaveSeries sync;
  SummaryStats offset_error;
  SummaryStats steady_offset_error;
  SkewSummary trigger_skew;
  std::vector<SensorReport> sensors;
};

struct ToleranceCell {
  ToleranceQuery query;
  double exact_ms = 0.0;
  std::int64_t rounded_ms = 0;
  /// Worst machine steady-state p95 offset error is within this tolerance.
  bool within_sync_budget = false;
};

struct SpeedRow {
  SpeedObservation observation;
  SpeedEstimate estimate;
};

struct Report {
  ScenarioConfig config;
  std::uint64_t trace_events = 0;
  std::uint64_t trace_hash = 0;
  std::vector<MachineReport> machines;
  double worst_steady_p95_ms = 0.0;
  std::vector<ToleranceCell> tolerance;
  std::vector<SpeedRow> speed;
};

/// Builds the simulation, runs sync sessions and sensor schedules together,
/// and assembles the report. Deterministic in (config, seed).
Report run_scenario(const ScenarioConfig& config);

/// Runs the scenario once per seed, on up to `threads` worker threads.
/// Output order follows `seeds` and does not depend on `threads`.
std::vector<Report> run_sweep(const ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                              unsigned threads = 1);

/// Report as pretty-printed JSON; identical bytes for identical runs.
std::string report_to_json(const Report& report);

/// Writes offset_<machine>.csv and samples_<machine>_<sensor>.csv into `dir`.
void write_csv(const Report& report, const std::filesystem::path& dir);

struct Table1 {
  std::array<double, 4> velocities_mps{5.0, 10.0, 20.0, 40.0};
  std::array<double, 2> iou_thresholds{0.5, 0.0};
  double object_length_m = kDefaultObjectLength;
  /// cells[threshold][velocity] in ms.
  std::array<std::array<std::int64_t, 4>, 2> cells{};
};

/// Tolerable sync error for v in {5, 10, 20, 40} m/s and IoU 0.5 / 0.0.
Table1 builtin_table1();

/// Two RSU observations of one object, second RSU off by 849 ms.
SpeedRow builtin_speed_example();

}  // namespace tsync
