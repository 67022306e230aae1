#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "tsync/error.hpp"
#include "tsync/overloaded.hpp"
#include "tsync/scenario.hpp"
#include "tsync/units.hpp"

namespace tsync {

using json = nlohmann::ordered_json;

namespace {

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

std::string join(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

// Reads one JSON object, tracking which keys were consumed so that leftovers
// (typos, unsupported options) can be reported with their path.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(std::string_view key) const { return join(path_, key); }

  const json* find(std::string_view key) {
    const auto it = node_.find(std::string(key));
    if (it == node_.end()) return nullptr;
    seen_.insert(std::string(key));
    return &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (!v) throw ConfigError(at(key), "missing required field");
    return *v;
  }

  Nanos duration(std::string_view key, std::optional<Nanos> fallback = std::nullopt) {
    const json* v = fallback ? find(key) : &require(key);
    if (!v) return *fallback;
    if (!v->is_string()) {
      throw ConfigError(at(key), "times must be strings with a unit, e.g. \"100us\"");
    }
    try {
      return parse_duration(v->get<std::string>());
    } catch (const DomainError& e) {
      throw ConfigError(at(key), e.what());
    }
  }

  double number(std::string_view key, std::optional<double> fallback = std::nullopt) {
    const json* v = fallback ? find(key) : &require(key);
    if (!v) return *fallback;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(std::string_view key, std::optional<std::int64_t> fallback = std::nullopt) {
    const json* v = fallback ? find(key) : &require(key);
    if (!v) return *fallback;
    if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  bool boolean(std::string_view key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(std::string_view key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = fallback ? find(key) : &require(key);
    if (!v) return *fallback;
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    return v->get<std::string>();
  }

  template <class Enum, std::size_t N>
  Enum choice(std::string_view key, const std::pair<std::string_view, Enum> (&options)[N],
              std::optional<std::type_identity_t<Enum>> fallback = std::nullopt) {
    const json* v = fallback ? find(key) : &require(key);
    if (!v) return *fallback;
    if (v->is_string()) {
      const auto text = v->get<std::string>();
      for (const auto& [name, value] : options) {
        if (text == name) return value;
      }
    }
    std::string names;
    for (const auto& [name, value] : options) {
      names += (names.empty() ? "" : ", ") + std::string(name);
    }
    throw ConfigError(at(key), "expected one of: " + names);
  }

  /// Throws on any key that was never read.
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(at(key), "unknown field");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

const json& require_array(const json& node, const std::string& path) {
  if (!node.is_array()) throw ConfigError(path, "expected an array");
  return node;
}

// Enum spellings shared by the parser and the echo.
constexpr std::pair<std::string_view, Protocol> kProtocols[] = {
    {"PTP", Protocol::Ptp}, {"NTP", Protocol::NtpStyle}};
constexpr std::pair<std::string_view, TimeSourceKind> kSources[] = {
    {"GPS", TimeSourceKind::Gps}, {"SCLK", TimeSourceKind::Sclk}};
constexpr std::pair<std::string_view, TriggerKind> kTriggers[] = {
    {"external", TriggerKind::ExternallyTriggered}, {"internal", TriggerKind::InternallyTriggered}};
constexpr std::pair<std::string_view, SensorInterface> kInterfaces[] = {
    {"MIPI", SensorInterface::Mipi},
    {"SerialPort", SensorInterface::SerialPort},
    {"Ethernet", SensorInterface::Ethernet},
    {"CAN", SensorInterface::Can}};
constexpr std::pair<std::string_view, TriggerPath> kPaths[] = {
    {"hardware", TriggerPath::Hardware}, {"host", TriggerPath::HostSoftware}};
constexpr std::pair<std::string_view, StampLocation> kLocations[] = {
    {"interface", StampLocation::AtInterface}, {"host", StampLocation::AtHost}};

template <class Enum, std::size_t N>
std::string name_of(const std::pair<std::string_view, Enum> (&options)[N], Enum value) {
  for (const auto& [name, v] : options) {
    if (v == value) return std::string(name);
  }
  return "?";
}

Jitter parse_jitter(const json& node, const std::string& path) {
  ObjectReader r(node, path);
  const std::string kind = r.string("kind");
  Jitter out;
  if (kind == "none") {
    out = NoJitter{};
  } else if (kind == "uniform") {
    out = UniformJitter{r.duration("half_width")};
  } else if (kind == "uniform_range") {
    out = UniformRangeJitter{r.duration("low"), r.duration("high")};
  } else if (kind == "exponential") {
    out = ExponentialJitter{r.duration("mean")};
  } else {
    throw ConfigError(r.at("kind"), "expected one of: none, uniform, uniform_range, exponential");
  }
  r.finish();
  try {
    validate(out);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

json jitter_json(const Jitter& jitter) {
  return std::visit(
      Overloaded{
          [](const NoJitter&) { return json{{"kind", "none"}}; },
          [](const UniformJitter& j) {
            return json{{"kind", "uniform"}, {"half_width", format_duration(j.half_width)}};
          },
          [](const UniformRangeJitter& j) {
            return json{{"kind", "uniform_range"},
                        {"low", format_duration(j.low)},
                        {"high", format_duration(j.high)}};
          },
          [](const ExponentialJitter& j) {
            return json{{"kind", "exponential"}, {"mean", format_duration(j.mean)}};
          },
      },
      jitter);
}

StampNoiseModel parse_noise(const json* node, const std::string& path, StampNoiseModel fallback) {
  if (!node) return fallback;
  ObjectReader r(*node, path);
  StampNoiseModel out;
  out.base_latency = r.duration("base", Nanos{0});
  if (const json* j = r.find("jitter")) out.jitter = parse_jitter(*j, r.at("jitter"));
  r.finish();
  if (out.base_latency < 0) throw ConfigError(r.at("base"), "must be >= 0");
  return out;
}

json noise_json(const StampNoiseModel& noise) {
  return json{{"base", format_duration(noise.base_latency)}, {"jitter", jitter_json(noise.jitter)}};
}

ClockModel parse_clock(const json* node, const std::string& path) {
  ClockModel out;
  if (!node) return out;
  ObjectReader r(*node, path);
  out.initial_offset = r.duration("offset", Nanos{0});
  try {
    out.drift = Ppb::from_ppm(r.number("drift_ppm", 0.0));
    out.read_jitter = r.duration("read_jitter", Nanos{0});
    out.slew_rate_limit = Ppb::from_ppm(r.number("slew_rate_limit_ppm", out.slew_rate_limit.ppm()));
    r.finish();
    out.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

json clock_json(const ClockModel& clock) {
  return json{{"offset", format_duration(clock.initial_offset)},
              {"drift_ppm", clock.drift.ppm()},
              {"read_jitter", format_duration(clock.read_jitter)},
              {"slew_rate_limit_ppm", clock.slew_rate_limit.ppm()}};
}

SensorConfig parse_sensor(const json& node, const std::string& path) {
  ObjectReader r(node, path);
  SensorConfig out;
  out.preset = r.string("type");
  const std::string name = r.string("name");
  const std::int64_t rate = r.integer("rate_hz");
  if (out.preset == "camera") {
    out.spec = camera_spec(name, rate);
  } else if (out.preset == "imu") {
    out.spec = imu_spec(name, rate);
  } else if (out.preset == "lidar") {
    out.spec = lidar_spec(name, rate);
  } else if (out.preset == "radar") {
    out.spec = radar_spec(name, rate);
  } else if (out.preset == "custom") {
    out.spec.name = name;
    out.spec.rate_hz = rate;
    out.spec.kind = r.choice("trigger", kTriggers);
    out.spec.interface = r.choice("interface", kInterfaces);
  } else {
    throw ConfigError(r.at("type"), "expected one of: camera, imu, lidar, radar, custom");
  }
  auto& spec = out.spec;
  spec.kind = r.choice("trigger", kTriggers, spec.kind);
  spec.interface = r.choice("interface", kInterfaces, spec.interface);
  spec.trigger_path = r.choice("trigger_path", kPaths, spec.trigger_path);
  spec.trigger_path_noise = parse_noise(r.find("trigger_noise"), r.at("trigger_noise"),
                                        spec.trigger_path_noise);
  spec.stamping = r.choice("stamping", kLocations, spec.stamping);
  spec.interface_latency = parse_noise(r.find("interface_latency"), r.at("interface_latency"),
                                       spec.interface_latency);
  spec.host_latency = parse_noise(r.find("host_latency"), r.at("host_latency"), spec.host_latency);
  if (const json* clock = r.find("internal_clock")) {
    if (spec.kind == TriggerKind::ExternallyTriggered) {
      throw ConfigError(r.at("internal_clock"),
                        "externally-triggered sensors have no internal clock");
    }
    spec.internal_clock = parse_clock(clock, r.at("internal_clock"));
  } else if (spec.kind == TriggerKind::InternallyTriggered) {
    spec.internal_clock = spec.internal_clock.value_or(ClockModel{});
  } else {
    spec.internal_clock.reset();
  }
  out.compensate = r.boolean("compensate", true);
  r.finish();
  return out;
}

json sensor_json(const SensorConfig& sensor) {
  const auto& s = sensor.spec;
  json out{{"name", s.name},
           {"type", sensor.preset},
           {"rate_hz", s.rate_hz},
           {"trigger", name_of(kTriggers, s.kind)},
           {"interface", name_of(kInterfaces, s.interface)},
           {"trigger_path", name_of(kPaths, s.trigger_path)},
           {"trigger_noise", noise_json(s.trigger_path_noise)},
           {"stamping", name_of(kLocations, s.stamping)},
           {"interface_latency", noise_json(s.interface_latency)},
           {"host_latency", noise_json(s.host_latency)}};
  if (s.internal_clock) out["internal_clock"] = clock_json(*s.internal_clock);
  out["compensate"] = sensor.compensate;
  return out;
}

Position parse_position(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() < 2 || node.size() > 3) {
    throw ConfigError(path, "expected [x, y] or [x, y, z] in meters");
  }
  for (const auto& v : node) {
    if (!v.is_number()) throw ConfigError(path, "coordinates must be numbers");
  }
  return Position{node[0].get<double>(), node[1].get<double>(),
                  node.size() == 3 ? node[2].get<double>() : 0.0};
}

json position_json(const Position& p) {
  if (p.z == 0.0) return json::array({p.x, p.y});
  return json::array({p.x, p.y, p.z});
}

double to_ms(Nanos v) { return static_cast<double>(v) / static_cast<double>(kMillisecond); }

Nanos ms_to_nanos(double ms) { return round_half_away(ms * static_cast<double>(kMillisecond)); }

ToleranceSweep table1_sweep() {
  return ToleranceSweep{{5.0, 10.0, 20.0, 40.0}, {0.5, 0.0}, kDefaultObjectLength};
}

std::vector<double> parse_numbers(const json& node, const std::string& path) {
  require_array(node, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) throw ConfigError(index_path(path, i), "expected a number");
    out.push_back(node[i].get<double>());
  }
  return out;
}

ImpactConfig parse_impact(const json* node, const std::string& path) {
  ImpactConfig out;
  if (!node) {
    out.tolerance.push_back(table1_sweep());
    return out;
  }
  ObjectReader r(*node, path);
  if (const json* tol = r.find("tolerance")) {
    require_array(*tol, r.at("tolerance"));
    for (std::size_t i = 0; i < tol->size(); ++i) {
      ObjectReader t((*tol)[i], index_path(r.at("tolerance"), i));
      ToleranceSweep sweep;
      sweep.velocities_mps = parse_numbers(t.require("velocities_mps"), t.at("velocities_mps"));
      sweep.iou_thresholds = parse_numbers(t.require("iou_thresholds"), t.at("iou_thresholds"));
      sweep.object_length_m = t.number("object_length_m", kDefaultObjectLength);
      t.finish();
      out.tolerance.push_back(std::move(sweep));
    }
  } else {
    out.tolerance.push_back(table1_sweep());
  }
  if (const json* obs = r.find("speed_observations")) {
    require_array(*obs, r.at("speed_observations"));
    for (std::size_t i = 0; i < obs->size(); ++i) {
      ObjectReader o((*obs)[i], index_path(r.at("speed_observations"), i));
      SpeedObservation s;
      s.p1 = parse_position(o.require("p1"), o.at("p1"));
      s.p2 = parse_position(o.require("p2"), o.at("p2"));
      s.t1_ms = to_ms(o.duration("t1"));
      s.t2_ms = to_ms(o.duration("t2"));
      s.delta_t_ms = to_ms(o.duration("delta_t", Nanos{0}));
      o.finish();
      out.speed_observations.push_back(s);
    }
  }
  r.finish();
  return out;
}

json impact_json(const ImpactConfig& impact) {
  json tolerance = json::array();
  for (const auto& t : impact.tolerance) {
    tolerance.push_back(json{{"velocities_mps", t.velocities_mps},
                             {"iou_thresholds", t.iou_thresholds},
                             {"object_length_m", t.object_length_m}});
  }
  json speed = json::array();
  for (const auto& s : impact.speed_observations) {
    speed.push_back(json{{"p1", position_json(s.p1)},
                         {"p2", position_json(s.p2)},
                         {"t1", format_duration(ms_to_nanos(s.t1_ms))},
                         {"t2", format_duration(ms_to_nanos(s.t2_ms))},
                         {"delta_t", format_duration(ms_to_nanos(s.delta_t_ms))}});
  }
  return json{{"tolerance", tolerance}, {"speed_observations", speed}};
}

}  // namespace

ScenarioConfig parse_config(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  ObjectReader r(root, "");
  ScenarioConfig cfg;

  cfg.schema = static_cast<int>(r.integer("schema"));
  if (cfg.schema != kConfigSchema) {
    throw ConfigError("schema", "unsupported schema " + std::to_string(cfg.schema) +
                                    " (expected " + std::to_string(kConfigSchema) + ")");
  }
  {
    const json* seed = r.find("seed");
    if (seed) {
      if (!seed->is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
      cfg.seed = seed->get<std::uint64_t>();
    }
  }
  cfg.duration = r.duration("duration");
  cfg.warmup = r.duration("warmup", cfg.duration / 3);

  if (const json* gm_node = r.find("grandmaster")) {
    const json* gm = gm_node;
    if (gm_node->is_array()) {
      if (gm_node->size() != 1) {
        throw ConfigError("grandmaster", "exactly one grandmaster is required, found " +
                                             std::to_string(gm_node->size()));
      }
      gm = &(*gm_node)[0];
    }
    ObjectReader g(*gm, "grandmaster");
    cfg.grandmaster_name = g.string("name", std::string("gps"));
    cfg.grandmaster.kind = g.choice("kind", kSources, TimeSourceKind::Gps);
    cfg.grandmaster.epoch_offset = g.duration("epoch_offset", Nanos{0});
    g.finish();
  }

  if (const json* p = r.find("protocol")) {
    ObjectReader pr(*p, "protocol");
    auto& proto = cfg.protocol;
    proto.protocol = pr.choice("kind", kProtocols, Protocol::Ptp);
    proto.servo.sync_interval = pr.duration("sync_interval", proto.servo.sync_interval);
    proto.servo.kp = pr.number("kp", proto.servo.kp);
    proto.servo.ki = pr.number("ki", proto.servo.ki);
    proto.servo.step_threshold = pr.duration("step_threshold", proto.servo.step_threshold);
    proto.delay_req_turnaround = pr.duration("delay_req_turnaround", proto.delay_req_turnaround);
    const StampNoiseModel fallback =
        proto.protocol == Protocol::NtpStyle ? default_ntp_software_noise() : StampNoiseModel{};
    proto.noise = parse_noise(pr.find("stamp_noise"), pr.at("stamp_noise"), fallback);
    pr.finish();
  }

  if (const json* t = r.find("timer")) {
    ObjectReader tr(*t, "timer");
    cfg.timer.frequency_hz = tr.integer("frequency_hz", cfg.timer.frequency_hz);
    cfg.timer.hardware_trigger_cycles =
        tr.integer("hardware_trigger_cycles", cfg.timer.hardware_trigger_cycles);
    cfg.strict_rates = tr.boolean("strict_rates", false);
    tr.finish();
  }

  {
    const json& machines = require_array(r.require("machines"), "machines");
    for (std::size_t i = 0; i < machines.size(); ++i) {
      ObjectReader m(machines[i], index_path("machines", i));
      MachineConfig mc;
      mc.name = m.string("name");
      mc.clock = parse_clock(m.find("clock"), m.at("clock"));
      if (const json* sensors = m.find("sensors")) {
        require_array(*sensors, m.at("sensors"));
        for (std::size_t j = 0; j < sensors->size(); ++j) {
          mc.sensors.push_back(parse_sensor((*sensors)[j], index_path(m.at("sensors"), j)));
        }
      }
      m.finish();
      cfg.machines.push_back(std::move(mc));
    }
  }

  {
    const json& links = require_array(r.require("links"), "links");
    for (std::size_t i = 0; i < links.size(); ++i) {
      ObjectReader l(links[i], index_path("links", i));
      LinkConfig lc;
      lc.from = l.string("from");
      lc.to = l.string("to");
      lc.model.forward_delay = l.duration("forward_delay", Nanos{0});
      lc.model.reverse_delay = l.duration("reverse_delay", lc.model.forward_delay);
      if (const json* j = l.find("jitter")) lc.model.jitter = parse_jitter(*j, l.at("jitter"));
      lc.model.drop_probability = l.number("drop_probability", 0.0);
      l.finish();
      cfg.links.push_back(std::move(lc));
    }
  }

  cfg.impact = parse_impact(r.find("impact"), "impact");
  r.finish();

  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.schema != kConfigSchema) throw ConfigError("schema", "unsupported schema");
  if (cfg.duration <= 0) throw ConfigError("duration", "must be > 0");
  if (cfg.warmup < 0 || cfg.warmup >= cfg.duration) {
    throw ConfigError("warmup", "must lie in [0, duration)");
  }
  if (cfg.grandmaster_name.empty()) throw ConfigError("grandmaster.name", "must not be empty");
  try {
    cfg.protocol.validate();
  } catch (const DomainError& e) {
    throw ConfigError("protocol", e.what());
  }
  try {
    cfg.timer.validate();
  } catch (const DomainError& e) {
    throw ConfigError("timer", e.what());
  }

  std::set<std::string> names{cfg.grandmaster_name};
  for (std::size_t i = 0; i < cfg.machines.size(); ++i) {
    const auto& m = cfg.machines[i];
    const std::string path = index_path("machines", i);
    if (m.name.empty()) throw ConfigError(path + ".name", "must not be empty");
    if (!names.insert(m.name).second) {
      throw ConfigError(path + ".name", "duplicate machine name '" + m.name + "'");
    }
    try {
      m.clock.validate();
    } catch (const DomainError& e) {
      throw ConfigError(path + ".clock", e.what());
    }
    std::set<std::string> sensor_names;
    std::vector<SensorSpec> specs;
    for (std::size_t j = 0; j < m.sensors.size(); ++j) {
      const auto& s = m.sensors[j].spec;
      const std::string spath = index_path(path + ".sensors", j);
      if (!sensor_names.insert(s.name).second) {
        throw ConfigError(spath + ".name", "duplicate sensor name '" + s.name + "'");
      }
      try {
        s.validate();
      } catch (const DomainError& e) {
        throw ConfigError(spath, e.what());
      }
      specs.push_back(s);
    }
    if (const auto bad = validate_rates(specs, cfg.strict_rates)) {
      throw RateError(path + ".sensors", bad->first, bad->second,
                      "rates of '" + bad->first + "' (" + std::to_string(bad->first_rate_hz) +
                          " Hz) and '" + bad->second + "' (" +
                          std::to_string(bad->second_rate_hz) +
                          " Hz) must divide one another to share the trigger timer");
    }
  }

  for (std::size_t i = 0; i < cfg.links.size(); ++i) {
    const auto& l = cfg.links[i];
    const std::string path = index_path("links", i);
    if (l.from != cfg.grandmaster_name) {
      throw ConfigError(path + ".from", "links must start at the grandmaster '" +
                                            cfg.grandmaster_name + "', not '" + l.from + "'");
    }
    if (l.to == cfg.grandmaster_name || !names.count(l.to)) {
      throw ConfigError(path + ".to", "unknown machine '" + l.to + "'");
    }
    try {
      l.model.validate();
    } catch (const DomainError& e) {
      throw ConfigError(path, e.what());
    }
  }
  topology_of(cfg).validate();

  for (std::size_t i = 0; i < cfg.impact.tolerance.size(); ++i) {
    const auto& t = cfg.impact.tolerance[i];
    for (double v : t.velocities_mps) {
      for (double theta : t.iou_thresholds) {
        try {
          ToleranceQuery{v, theta, t.object_length_m}.validate();
        } catch (const DomainError& e) {
          throw ConfigError(index_path("impact.tolerance", i), e.what());
        }
      }
    }
  }
  for (std::size_t i = 0; i < cfg.impact.speed_observations.size(); ++i) {
    const auto& s = cfg.impact.speed_observations[i];
    if (!(s.t2_ms > s.t1_ms) || !(s.t2_ms + s.delta_t_ms > s.t1_ms)) {
      throw ConfigError(index_path("impact.speed_observations", i),
                        "needs t2 > t1 and t2 + delta_t > t1");
    }
  }
}

SyncTopology topology_of(const ScenarioConfig& cfg) {
  SyncTopology topo;
  topo.grandmaster = cfg.grandmaster;
  topo.nodes.push_back(SyncNode{cfg.grandmaster_name, NodeRole::Grandmaster, ClockModel{}});
  for (const auto& m : cfg.machines) topo.nodes.push_back(SyncNode{m.name, NodeRole::Slave, m.clock});
  for (const auto& l : cfg.links) topo.links.push_back(SyncLink{l.from, l.to, l.model});
  return topo;
}

std::string config_to_json(const ScenarioConfig& cfg) {
  json machines = json::array();
  for (const auto& m : cfg.machines) {
    json sensors = json::array();
    for (const auto& s : m.sensors) sensors.push_back(sensor_json(s));
    machines.push_back(json{{"name", m.name}, {"clock", clock_json(m.clock)}, {"sensors", sensors}});
  }
  json links = json::array();
  for (const auto& l : cfg.links) {
    links.push_back(json{{"from", l.from},
                         {"to", l.to},
                         {"forward_delay", format_duration(l.model.forward_delay)},
                         {"reverse_delay", format_duration(l.model.reverse_delay)},
                         {"jitter", jitter_json(l.model.jitter)},
                         {"drop_probability", l.model.drop_probability}});
  }
  const auto& p = cfg.protocol;
  json out{
      {"schema", cfg.schema},
      {"seed", cfg.seed},
      {"duration", format_duration(cfg.duration)},
      {"warmup", format_duration(cfg.warmup)},
      {"grandmaster",
       {{"name", cfg.grandmaster_name},
        {"kind", name_of(kSources, cfg.grandmaster.kind)},
        {"epoch_offset", format_duration(cfg.grandmaster.epoch_offset)}}},
      {"protocol",
       {{"kind", name_of(kProtocols, p.protocol)},
        {"sync_interval", format_duration(p.servo.sync_interval)},
        {"kp", p.servo.kp},
        {"ki", p.servo.ki},
        {"step_threshold", format_duration(p.servo.step_threshold)},
        {"delay_req_turnaround", format_duration(p.delay_req_turnaround)},
        {"stamp_noise", noise_json(p.noise)}}},
      {"timer",
       {{"frequency_hz", cfg.timer.frequency_hz},
        {"hardware_trigger_cycles", cfg.timer.hardware_trigger_cycles},
        {"strict_rates", cfg.strict_rates}}},
      {"machines", machines},
      {"links", links},
      {"impact", impact_json(cfg.impact)},
  };
  return out.dump(2);
}

}  // namespace tsync
