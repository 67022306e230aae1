#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsync/random.hpp"
#include "tsync/simnet.hpp"
#include "tsync/timebase.hpp"

namespace tsync {

/// PTP is the two-step hardware-stamped exchange; NtpStyle runs the same
/// four-timestamp exchange with software-path stamping noise at both ends.
enum class Protocol { Ptp, NtpStyle };

/// The four timestamps of one round. t1/t4 are master readings, t2/t3 slave.
struct SyncExchange {
  LocalTime t1{};
  LocalTime t2{};
  LocalTime t3{};
  LocalTime t4{};
  Protocol protocol = Protocol::Ptp;
};

struct OffsetDelay {
  /// Slave clock minus master clock.
  Nanos offset = 0;
  Nanos mean_path_delay = 0;
};

/// Standard two-step estimator:
///   offset = ((t2 - t1) - (t4 - t3)) / 2,  delay = ((t2 - t1) + (t4 - t3)) / 2
/// with the halving rounded half away from zero.
OffsetDelay offset_and_delay(const SyncExchange& x);

struct ServoConfig {
  double kp = 0.7;
  double ki = 0.3;
  /// Offsets whose magnitude exceeds this are stepped; smaller ones slewed.
  Nanos step_threshold = milliseconds(1);
  Nanos sync_interval = seconds(1);

  void validate() const;
  bool operator==(const ServoConfig&) const = default;
};

struct ServoState {
  Nanos integral = 0;
  bool operator==(const ServoState&) const = default;
};

struct CorrectionCommand {
  Nanos amount = 0;
  CorrectionMode mode = CorrectionMode::Slew;
  bool operator==(const CorrectionCommand&) const = default;
};

/// PI law: command = kp * offset + ki * integral (integral taken before it
/// accumulates this offset).
std::pair<CorrectionCommand, ServoState> servo_update(const ServoConfig& config, ServoState state,
                                                      Nanos measured_offset);

enum class TimeSourceKind { Gps, Sclk };

/// Reference timescale served by the grandmaster. Its clock has no drift or
/// jitter relative to that timescale.
struct GrandmasterSource {
  TimeSourceKind kind = TimeSourceKind::Gps;
  Nanos epoch_offset = 0;
  bool operator==(const GrandmasterSource&) const = default;
};

ClockModel grandmaster_clock_model(const GrandmasterSource& source);

/// Error added to a timestamp on its way from the event to the stamping point.
struct StampNoiseModel {
  Nanos base_latency = 0;
  Jitter jitter = NoJitter{};

  /// Signed error base + jitter draw.
  Nanos draw_error(Rng& rng) const { return base_latency + draw(jitter, rng); }
  /// Latency base + jitter draw, floored at zero.
  Nanos draw_latency(Rng& rng) const;

  void validate() const;
  bool operator==(const StampNoiseModel&) const = default;
};

/// Software stamping path: Uniform[0.5 ms, 20 ms] added latency.
StampNoiseModel default_ntp_software_noise();

enum class NodeRole { Grandmaster, Slave };

struct SyncNode {
  std::string name;
  NodeRole role = NodeRole::Slave;
  /// Ignored for the grandmaster, whose clock follows the GrandmasterSource.
  ClockModel clock;
};

/// Link between a master (forward direction = master to slave) and a slave.
struct SyncLink {
  std::string master;
  std::string slave;
  LinkModel model;
};

struct SyncTopology {
  GrandmasterSource grandmaster;
  std::vector<SyncNode> nodes;
  std::vector<SyncLink> links;

  /// Throws ConfigError unless there is exactly one grandmaster, names are
  /// unique and every slave has exactly one link to the grandmaster.
  void validate() const;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::Ptp;
  ServoConfig servo;
  /// Stamping noise applied at both endpoints of every exchange.
  StampNoiseModel noise;
  /// Delay between Sync reception and Delay_Req emission at the slave.
  Nanos delay_req_turnaround = microseconds(10);

  void validate() const;
};

struct OffsetSample {
  TrueTime at{};
  /// True slave-minus-grandmaster offset just before the correction.
  Nanos error = 0;
  Nanos estimate = 0;
  Nanos path_delay = 0;
  CorrectionCommand command;
};

struct SlaveSeries {
  std::vector<OffsetSample> samples;
  std::uint64_t exchanges_started = 0;
  std::uint64_t exchanges_completed = 0;
};

/// Per-slave offset error series, keyed by slave name.
using OffsetErrorSeries = std::map<std::string, SlaveSeries>;

/// Runs the exchanges for every slave of a topology inside a Simulator.
/// Node ids follow the order of `topology.nodes`.
class SyncAgent {
 public:
  SyncAgent(const SyncTopology& topology, ProtocolConfig config, const RngFactory& rng);

  /// Schedules the first round for every slave at `first`.
  void start(Simulator& sim, TrueTime first);

  /// Consumes protocol events; returns false for events it does not own.
  bool handle(Simulator& sim, const Event& event);

  NodeId id(const std::string& name) const;
  const std::string& name(NodeId id) const { return nodes_.at(id).name; }
  NodeId grandmaster() const noexcept { return grandmaster_; }
  const ClockState& clock(NodeId id) const { return nodes_.at(id).clock; }

  /// Grandmaster timescale reading at true time t.
  LocalTime reference_time(TrueTime t) const;

  OffsetErrorSeries series() const;

 private:
  struct NodeRuntime {
    std::string name;
    NodeRole role = NodeRole::Slave;
    ClockState clock;
    Rng stamp_rng;
    /// Grandmaster-side stamping for this slave's exchanges.
    std::optional<Rng> master_stamp_rng;
    std::optional<Link> link;
    ServoState servo;
    SlaveSeries series;
  };

  struct Pending {
    NodeId slave = 0;
    std::optional<LocalTime> t1, t2, t3, t4;
  };

  LocalTime stamp(const ClockState& clock, Rng& rng, TrueTime at);
  void on_tick(Simulator& sim, const SyncTick& tick);
  void on_message(Simulator& sim, const MessageArrival& msg);
  void on_delay_req_due(Simulator& sim, const DelayReqDue& due);
  void try_complete(Simulator& sim, std::uint64_t exchange);

  ProtocolConfig config_;
  GrandmasterSource source_;
  std::vector<NodeRuntime> nodes_;
  NodeId grandmaster_ = 0;
  std::uint64_t next_exchange_ = 0;
  std::map<std::uint64_t, Pending> pending_;
};

struct SessionOptions {
  ProtocolConfig protocol;
  Nanos duration = seconds(300);
  std::uint64_t seed = 1;
};

/// Periodic exchanges + servo for every slave over `duration` of true time.
OffsetErrorSeries run_sync_session(const SyncTopology& topology, const SessionOptions& options);

/// Same as run_sync_session with protocol NtpStyle. When `software_noise` is
/// not given the default software-path noise is used.
OffsetErrorSeries ntp_style_session(const SyncTopology& topology, SessionOptions options,
                                    std::optional<StampNoiseModel> software_noise = std::nullopt);

}  // namespace tsync
