#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>

#include <json.hpp>

#include "tsync/error.hpp"
#include "tsync/scenario.hpp"
#include "tsync/units.hpp"

namespace tsync {

using json = nlohmann::ordered_json;

Nanos percentile_abs(std::span<const Nanos> values, double p) {
  if (values.empty()) return 0;
  std::vector<Nanos> sorted;
  sorted.reserve(values.size());
  for (Nanos v : values) sorted.push_back(v < 0 ? -v : v);
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

SummaryStats summarize(std::span<const Nanos> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  long double sum = 0;
  long double sum_abs = 0;
  for (Nanos v : values) {
    sum += v;
    sum_abs += v < 0 ? -v : v;
    s.max_abs = std::max(s.max_abs, v < 0 ? -v : v);
  }
  s.mean = static_cast<double>(sum / values.size());
  s.mean_abs = static_cast<double>(sum_abs / values.size());
  s.p50_abs = percentile_abs(values, 0.50);
  s.p95_abs = percentile_abs(values, 0.95);
  return s;
}

namespace {

struct MachineRuntime {
  NodeId node = 0;
  std::vector<SensorSpec> specs;
  TriggerSchedule schedule;
  // Records and stamping latencies per sensor, indexed by seq.
  std::vector<std::vector<SampleRecord>> records;
  std::vector<std::vector<Nanos>> latencies;
};

}  // namespace

Report run_scenario(const ScenarioConfig& config) {
  validate_config(config);
  const RngFactory rng(config.seed);
  SyncAgent agent(topology_of(config), config.protocol, rng);

  Simulator sim;
  sim.set_record_entries(false);
  agent.start(sim, TrueTime{0});

  std::vector<MachineRuntime> machines;
  machines.reserve(config.machines.size());
  for (const auto& mc : config.machines) {
    MachineRuntime m;
    m.node = agent.id(mc.name);
    for (const auto& s : mc.sensors) m.specs.push_back(s.spec);
    const RngFactory machine_rng(rng.key("machine:" + mc.name));
    m.schedule = generate_trigger_events(m.specs, config.timer, TrueTime{0}, config.duration,
                                         machine_rng, config.strict_rates);
    m.records.resize(m.specs.size());
    m.latencies.resize(m.specs.size());
    for (const auto& r : emit_samples(m.schedule, m.specs)) m.records[r.sensor].push_back(r);

    for (std::uint32_t i = 0; i < m.specs.size(); ++i) {
      for (const auto& p : m.schedule.sensors[i].pulses) {
        sim.schedule(p.delivered, TriggerPulse{m.node, i, p.tick});
      }
      Rng latency_rng = machine_rng.stream("stamp-latency:" + m.specs[i].name);
      const StampNoiseModel& latency = m.specs[i].stamp_latency();
      for (const auto& r : m.records[i]) {
        const Nanos l = latency.draw_latency(latency_rng);
        m.latencies[i].push_back(l);
        sim.schedule(r.event_true_time + l, SensorSample{m.node, i, r.seq});
      }
    }
    machines.push_back(std::move(m));
  }

  std::map<NodeId, std::size_t> machine_index;
  for (std::size_t i = 0; i < machines.size(); ++i) machine_index[machines[i].node] = i;

  sim.run_until(TrueTime{config.duration}, [&](Simulator& s, const Event& event) {
    if (agent.handle(s, event)) return;
    const auto* sample = std::get_if<SensorSample>(&event.payload);
    if (!sample) return;
    const std::size_t mi = machine_index.at(sample->machine);
    auto& m = machines[mi];
    auto& record = m.records[sample->sensor][sample->seq];
    const auto& spec = m.specs[sample->sensor];
    record = stamp(record, spec.stamping, m.latencies[sample->sensor][sample->seq],
                   agent.clock(m.node));
    if (config.machines[mi].sensors[sample->sensor].compensate) {
      record = compensate(record, spec.stamp_latency().base_latency);
    }
  });

  Report report;
  report.config = config;
  report.trace_events = sim.trace().count;
  report.trace_hash = sim.trace().hash;

  const OffsetErrorSeries series = agent.series();
  Nanos worst_p95 = 0;
  for (std::size_t mi = 0; mi < machines.size(); ++mi) {
    const auto& m = machines[mi];
    MachineReport mr;
    mr.name = config.machines[mi].name;
    mr.sync = series.at(mr.name);
    std::vector<Nanos> all;
    std::vector<Nanos> steady;
    for (const auto& s : mr.sync.samples) {
      all.push_back(s.error);
      if (s.at >= TrueTime{config.warmup}) steady.push_back(s.error);
    }
    mr.offset_error = summarize(all);
    mr.steady_offset_error = summarize(steady);
    worst_p95 = std::max(worst_p95, mr.steady_offset_error.p95_abs);
    mr.trigger_skew = pairwise_trigger_skew(m.schedule, m.specs);

    for (std::size_t i = 0; i < m.specs.size(); ++i) {
      SensorReport sr;
      sr.name = m.specs[i].name;
      std::vector<Nanos> trigger_latency;
      for (const auto& p : m.schedule.sensors[i].pulses) {
        trigger_latency.push_back(p.delivered - p.nominal);
      }
      sr.trigger_latency = summarize(trigger_latency);
      std::vector<Nanos> steady;
      for (const auto& r : m.records[i]) {
        if (!r.stamped_time) continue;
        sr.records.push_back(r);
        sr.residuals.push_back(stamp_error(r, agent.reference_time(r.event_true_time)));
        if (r.event_true_time >= TrueTime{config.warmup}) steady.push_back(sr.residuals.back());
      }
      sr.samples = sr.records.size();
      sr.stamp_residual = summarize(sr.residuals);
      sr.steady_stamp_residual = summarize(steady);
      mr.sensors.push_back(std::move(sr));
    }
    report.machines.push_back(std::move(mr));
  }
  report.worst_steady_p95_ms =
      static_cast<double>(worst_p95) / static_cast<double>(kMillisecond);

  for (const auto& sweep : config.impact.tolerance) {
    for (double theta : sweep.iou_thresholds) {
      for (double v : sweep.velocities_mps) {
        ToleranceCell cell;
        cell.query = ToleranceQuery{v, theta, sweep.object_length_m};
        cell.exact_ms = tolerable_sync_error_exact_ms(cell.query);
        cell.rounded_ms = tolerable_sync_error_ms(cell.query);
        cell.within_sync_budget = report.worst_steady_p95_ms <= cell.exact_ms;
        report.tolerance.push_back(cell);
      }
    }
  }
  for (const auto& obs : config.impact.speed_observations) {
    report.speed.push_back(SpeedRow{obs, speed_estimate(obs)});
  }
  return report;
}

std::vector<Report> run_sweep(const ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                              unsigned threads) {
  std::vector<Report> out(seeds.size());
  const auto run_one = [&](std::size_t i) {
    ScenarioConfig c = config;
    c.seed = seeds[i];
    out[i] = run_scenario(c);
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
    return out;
  }
  for (std::size_t begin = 0; begin < seeds.size(); begin += threads) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = begin; i < std::min(seeds.size(), begin + threads); ++i) {
      batch.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& f : batch) f.get();
  }
  return out;
}

namespace {

json stats_json(const SummaryStats& s) {
  return json{{"count", s.count},     {"mean", s.mean},       {"mean_abs", s.mean_abs},
              {"p50_abs", s.p50_abs}, {"p95_abs", s.p95_abs}, {"max_abs", s.max_abs}};
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const char* mode_name(CorrectionMode m) { return m == CorrectionMode::Step ? "step" : "slew"; }

}  // namespace

std::string report_to_json(const Report& report) {
  json machines = json::object();
  for (const auto& m : report.machines) {
    json sensors = json::object();
    for (const auto& s : m.sensors) {
      sensors[s.name] = json{{"samples", s.samples},
                             {"trigger_latency_ns", stats_json(s.trigger_latency)},
                             {"stamp_residual_ns", stats_json(s.stamp_residual)},
                             {"steady_stamp_residual_ns", stats_json(s.steady_stamp_residual)}};
    }
    machines[m.name] = json{
        {"sync",
         {{"exchanges_started", m.sync.exchanges_started},
          {"exchanges_completed", m.sync.exchanges_completed},
          {"offset_error_ns", stats_json(m.offset_error)},
          {"steady_offset_error_ns", stats_json(m.steady_offset_error)}}},
        {"trigger_skew",
         {{"coincident_ticks", m.trigger_skew.coincident_ticks},
          {"max_skew_ns", m.trigger_skew.max_skew}}},
        {"sensors", sensors}};
  }
  json tolerance = json::array();
  for (const auto& c : report.tolerance) {
    tolerance.push_back(json{{"velocity_mps", c.query.velocity_mps},
                             {"iou_threshold", c.query.iou_threshold},
                             {"object_length_m", c.query.object_length_m},
                             {"tolerance_ms", c.rounded_ms},
                             {"tolerance_ms_exact", c.exact_ms},
                             {"within_sync_budget", c.within_sync_budget}});
  }
  json speed = json::array();
  for (const auto& s : report.speed) {
    speed.push_back(json{{"t1_ms", s.observation.t1_ms},
                         {"t2_ms", s.observation.t2_ms},
                         {"delta_t_ms", s.observation.delta_t_ms},
                         {"speed_mps", s.estimate.true_mps},
                         {"biased_speed_mps", s.estimate.biased_mps},
                         {"error_mps", s.estimate.error_mps}});
  }
  json out{
      {"schema", kConfigSchema},
      {"seed", report.config.seed},
      {"config", json::parse(config_to_json(report.config))},
      {"trace", {{"events", report.trace_events}, {"hash", hex64(report.trace_hash)}}},
      {"machines", machines},
      {"impact",
       {{"worst_steady_p95_offset_error_ms", report.worst_steady_p95_ms},
        {"tolerance", tolerance},
        {"speed", speed}}},
  };
  return out.dump(2) + "\n";
}

void write_csv(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& m : report.machines) {
    std::ofstream off(dir / ("offset_" + m.name + ".csv"));
    if (!off) throw Error("cannot write CSV into '" + dir.string() + "'");
    off << "true_time_ns,error_ns,estimate_ns,path_delay_ns,command_ns,mode\n";
    for (const auto& s : m.sync.samples) {
      off << s.at.ns << ',' << s.error << ',' << s.estimate << ',' << s.path_delay << ','
          << s.command.amount << ',' << mode_name(s.command.mode) << '\n';
    }
    for (const auto& s : m.sensors) {
      std::ofstream out(dir / ("samples_" + m.name + "_" + s.name + ".csv"));
      out << "seq,event_true_time_ns,stamped_time_ns,location,compensated,residual_ns\n";
      for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& r = s.records[i];
        out << r.seq << ',' << r.event_true_time.ns << ',' << r.stamped_time->ns << ','
            << (r.stamping_location == StampLocation::AtInterface ? "interface" : "host") << ','
            << (r.compensated ? 1 : 0) << ',' << s.residuals[i] << '\n';
      }
    }
  }
}

Table1 builtin_table1() {
  Table1 t;
  for (std::size_t row = 0; row < t.iou_thresholds.size(); ++row) {
    for (std::size_t col = 0; col < t.velocities_mps.size(); ++col) {
      t.cells[row][col] = tolerable_sync_error_ms(
          ToleranceQuery{t.velocities_mps[col], t.iou_thresholds[row], t.object_length_m});
    }
  }
  return t;
}

SpeedRow builtin_speed_example() {
  SpeedObservation obs;
  obs.p1 = Position{180.388, 463.93};
  obs.p2 = Position{177.235, 463.749};
  obs.t1_ms = 6317.0;
  obs.t2_ms = 6818.0;
  obs.delta_t_ms = 849.0;
  return SpeedRow{obs, speed_estimate(obs)};
}

}  // namespace tsync
