#include "tsync/syncproto.hpp"

#include <cmath>
#include <set>

#include "tsync/error.hpp"
#include "tsync/overloaded.hpp"

namespace tsync {

OffsetDelay offset_and_delay(const SyncExchange& x) {
  const __int128 forward = x.t2 - x.t1;
  const __int128 reverse = x.t4 - x.t3;
  return OffsetDelay{div_round_half_away(forward - reverse, 2),
                     div_round_half_away(forward + reverse, 2)};
}

void ServoConfig::validate() const {
  if (!(kp >= 0.0) || !(ki >= 0.0) || !std::isfinite(kp) || !std::isfinite(ki)) {
    throw DomainError("servo gains must be finite and >= 0");
  }
  if (sync_interval <= 0) throw DomainError("sync interval must be > 0");
  if (step_threshold < 0) throw DomainError("step threshold must be >= 0");
}

std::pair<CorrectionCommand, ServoState> servo_update(const ServoConfig& config, ServoState state,
                                                      Nanos measured_offset) {
  const double command = config.kp * static_cast<double>(measured_offset) +
                         config.ki * static_cast<double>(state.integral);
  state.integral += measured_offset;
  const bool step = std::abs(measured_offset) > config.step_threshold;
  return {CorrectionCommand{round_half_away(command),
                            step ? CorrectionMode::Step : CorrectionMode::Slew},
          state};
}

ClockModel grandmaster_clock_model(const GrandmasterSource& source) {
  ClockModel model;
  model.initial_offset = source.epoch_offset;
  return model;
}

Nanos StampNoiseModel::draw_latency(Rng& rng) const {
  return std::max<Nanos>(0, draw_error(rng));
}

void StampNoiseModel::validate() const {
  if (base_latency < 0) throw DomainError("stamp base latency must be >= 0");
  tsync::validate(jitter);
}

StampNoiseModel default_ntp_software_noise() {
  return StampNoiseModel{0, UniformRangeJitter{microseconds(500), milliseconds(20)}};
}

void SyncTopology::validate() const {
  std::set<std::string> names;
  std::string gm;
  int grandmasters = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const std::string path = "nodes[" + std::to_string(i) + "]";
    if (n.name.empty()) throw ConfigError(path + ".name", "node name must not be empty");
    if (!names.insert(n.name).second) {
      throw ConfigError(path + ".name", "duplicate node name '" + n.name + "'");
    }
    if (n.role == NodeRole::Grandmaster) {
      ++grandmasters;
      gm = n.name;
    } else {
      try {
        n.clock.validate();
      } catch (const DomainError& e) {
        throw ConfigError(path + ".clock", e.what());
      }
    }
  }
  if (grandmasters != 1) {
    throw ConfigError("nodes", "topology needs exactly one grandmaster, found " +
                                   std::to_string(grandmasters));
  }
  std::map<std::string, int> link_count;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    const std::string path = "links[" + std::to_string(i) + "]";
    if (l.master != gm) {
      throw ConfigError(path + ".master", "link master '" + l.master + "' is not the grandmaster");
    }
    if (!names.count(l.slave) || l.slave == gm) {
      throw ConfigError(path + ".slave", "unknown slave '" + l.slave + "'");
    }
    try {
      l.model.validate();
    } catch (const DomainError& e) {
      throw ConfigError(path, e.what());
    }
    ++link_count[l.slave];
  }
  for (const auto& n : nodes) {
    if (n.role != NodeRole::Slave) continue;
    const int c = link_count[n.name];
    if (c == 0) throw ConfigError("links", "slave '" + n.name + "' is unreachable");
    if (c > 1) throw ConfigError("links", "slave '" + n.name + "' has more than one link");
  }
}

void ProtocolConfig::validate() const {
  servo.validate();
  noise.validate();
  if (delay_req_turnaround < 0) throw DomainError("delay_req turnaround must be >= 0");
}

SyncAgent::SyncAgent(const SyncTopology& topology, ProtocolConfig config, const RngFactory& rng)
    : config_(std::move(config)), source_(topology.grandmaster) {
  topology.validate();
  config_.validate();
  nodes_.reserve(topology.nodes.size());
  for (std::size_t i = 0; i < topology.nodes.size(); ++i) {
    const auto& n = topology.nodes[i];
    NodeRuntime rt;
    rt.name = n.name;
    rt.role = n.role;
    const ClockModel model =
        n.role == NodeRole::Grandmaster ? grandmaster_clock_model(source_) : n.clock;
    rt.clock = make_clock(model, TrueTime{0}, rng.key("clock-jitter:" + n.name));
    rt.stamp_rng = rng.stream("stamp:" + n.name);
    if (n.role == NodeRole::Grandmaster) grandmaster_ = static_cast<NodeId>(i);
    nodes_.push_back(std::move(rt));
  }
  for (const auto& l : topology.links) {
    auto& slave = nodes_.at(id(l.slave));
    slave.link.emplace(l.model, rng.stream("link:" + l.master + "->" + l.slave));
    slave.master_stamp_rng = rng.stream("stamp:" + l.master + "->" + l.slave);
  }
}

NodeId SyncAgent::id(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return static_cast<NodeId>(i);
  }
  throw ConfigError("", "unknown node '" + name + "'");
}

LocalTime SyncAgent::reference_time(TrueTime t) const {
  return LocalTime{t.ns + source_.epoch_offset};
}

void SyncAgent::start(Simulator& sim, TrueTime first) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].role == NodeRole::Slave) sim.schedule(first, SyncTick{static_cast<NodeId>(i)});
  }
}

LocalTime SyncAgent::stamp(const ClockState& clock, Rng& rng, TrueTime at) {
  return local_from_true(clock, at) + config_.noise.draw_error(rng);
}

bool SyncAgent::handle(Simulator& sim, const Event& event) {
  return std::visit(Overloaded{
                        [&](const SyncTick& t) {
                          on_tick(sim, t);
                          return true;
                        },
                        [&](const MessageArrival& m) {
                          on_message(sim, m);
                          return true;
                        },
                        [&](const DelayReqDue& d) {
                          on_delay_req_due(sim, d);
                          return true;
                        },
                        [](const auto&) { return false; },
                    },
                    event.payload);
}

void SyncAgent::on_tick(Simulator& sim, const SyncTick& tick) {
  auto& slave = nodes_.at(tick.slave);
  auto& gm = nodes_.at(grandmaster_);
  const TrueTime now = sim.now();
  const std::uint64_t exchange = next_exchange_++;
  pending_[exchange] = Pending{tick.slave, {}, {}, {}, {}};
  ++slave.series.exchanges_started;

  // Two-step: Sync leaves at `now`, Follow_Up carries its precise stamp.
  const LocalTime t1 = stamp(gm.clock, *slave.master_stamp_rng, now);
  sim.send(*slave.link, Direction::Forward,
           MessageArrival{grandmaster_, tick.slave, MessageType::Sync, exchange, 0}, now);
  sim.send(*slave.link, Direction::Forward,
           MessageArrival{grandmaster_, tick.slave, MessageType::FollowUp, exchange, t1.ns}, now);
  sim.schedule(now + config_.servo.sync_interval, SyncTick{tick.slave});
}

void SyncAgent::on_message(Simulator& sim, const MessageArrival& msg) {
  const auto it = pending_.find(msg.exchange);
  if (it == pending_.end()) return;
  Pending& p = it->second;
  const TrueTime now = sim.now();
  switch (msg.type) {
    case MessageType::Sync:
      p.t2 = stamp(nodes_.at(p.slave).clock, nodes_.at(p.slave).stamp_rng, now);
      sim.schedule(now + config_.delay_req_turnaround, DelayReqDue{p.slave, msg.exchange});
      break;
    case MessageType::FollowUp:
      p.t1 = LocalTime{msg.carried};
      try_complete(sim, msg.exchange);
      break;
    case MessageType::DelayReq: {
      auto& slave = nodes_.at(p.slave);
      const LocalTime t4 = stamp(nodes_.at(grandmaster_).clock, *slave.master_stamp_rng, now);
      sim.send(*slave.link, Direction::Forward,
               MessageArrival{grandmaster_, p.slave, MessageType::DelayResp, msg.exchange, t4.ns},
               now);
      break;
    }
    case MessageType::DelayResp:
      p.t4 = LocalTime{msg.carried};
      try_complete(sim, msg.exchange);
      break;
  }
}

void SyncAgent::on_delay_req_due(Simulator& sim, const DelayReqDue& due) {
  const auto it = pending_.find(due.exchange);
  if (it == pending_.end()) return;
  auto& slave = nodes_.at(due.slave);
  it->second.t3 = stamp(slave.clock, slave.stamp_rng, sim.now());
  sim.send(*slave.link, Direction::Reverse,
           MessageArrival{due.slave, grandmaster_, MessageType::DelayReq, due.exchange, 0},
           sim.now());
}

void SyncAgent::try_complete(Simulator& sim, std::uint64_t exchange) {
  const auto it = pending_.find(exchange);
  const Pending& p = it->second;
  if (!p.t1 || !p.t2 || !p.t3 || !p.t4) return;

  auto& slave = nodes_.at(p.slave);
  const TrueTime now = sim.now();
  const OffsetDelay od = offset_and_delay(SyncExchange{*p.t1, *p.t2, *p.t3, *p.t4,
                                                       config_.protocol});
  OffsetSample sample;
  sample.at = now;
  sample.error = local_from_true_noiseless(slave.clock, now) - reference_time(now);
  sample.estimate = od.offset;
  sample.path_delay = od.mean_path_delay;

  auto [command, servo] = servo_update(config_.servo, slave.servo, od.offset);
  slave.servo = servo;
  slave.clock = apply_correction(slave.clock, command.amount, command.mode, now);
  slave.clock.last_sync_epoch = now;
  sample.command = command;

  slave.series.samples.push_back(sample);
  ++slave.series.exchanges_completed;
  pending_.erase(it);
}

OffsetErrorSeries SyncAgent::series() const {
  OffsetErrorSeries out;
  for (const auto& n : nodes_) {
    if (n.role == NodeRole::Slave) out[n.name] = n.series;
  }
  return out;
}

OffsetErrorSeries run_sync_session(const SyncTopology& topology, const SessionOptions& options) {
  const RngFactory rng(options.seed);
  SyncAgent agent(topology, options.protocol, rng);
  Simulator sim;
  sim.set_record_entries(false);
  agent.start(sim, TrueTime{0});
  sim.run_until(TrueTime{options.duration},
                [&](Simulator& s, const Event& e) { agent.handle(s, e); });
  return agent.series();
}

OffsetErrorSeries ntp_style_session(const SyncTopology& topology, SessionOptions options,
                                    std::optional<StampNoiseModel> software_noise) {
  options.protocol.protocol = Protocol::NtpStyle;
  options.protocol.noise = software_noise.value_or(default_ntp_software_noise());
  return run_sync_session(topology, options);
}

}  // namespace tsync
