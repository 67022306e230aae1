// tsync command-line interface.
//
//   tsync run <file> [--seed N] [--out path] [--csv dir]
//   tsync validate <file>
//   tsync table1 [--json]
//   tsync speed-example [--json]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsync/error.hpp"
#include "tsync/scenario.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

void print_table1(bool as_json) {
  const tsync::Table1 t = tsync::builtin_table1();
  if (as_json) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < t.iou_thresholds.size(); ++r) {
      rows.push_back({{"iou_threshold", t.iou_thresholds[r]}, {"tolerance_ms", t.cells[r]}});
    }
    const nlohmann::ordered_json out{{"object_length_m", t.object_length_m},
                                     {"velocities_mps", t.velocities_mps},
                                     {"rows", rows}};
    std::cout << out.dump(2) << '\n';
    return;
  }
  std::printf("Tolerable synchronization error (object length %.2f m)\n", t.object_length_m);
  std::printf("%-16s", "velocity (m/s)");
  for (double v : t.velocities_mps) std::printf("%8.0f", v);
  std::printf("\n");
  for (std::size_t r = 0; r < t.iou_thresholds.size(); ++r) {
    std::printf("IoU >= %-4.1f (ms) ", t.iou_thresholds[r]);
    for (auto cell : t.cells[r]) std::printf("%8lld", static_cast<long long>(cell));
    std::printf("\n");
  }
}

void print_speed_example(bool as_json) {
  const tsync::SpeedRow row = tsync::builtin_speed_example();
  const auto& o = row.observation;
  const auto& e = row.estimate;
  if (as_json) {
    const nlohmann::ordered_json out{{"p1", {o.p1.x, o.p1.y}},
                                     {"p2", {o.p2.x, o.p2.y}},
                                     {"t1_ms", o.t1_ms},
                                     {"t2_ms", o.t2_ms},
                                     {"delta_t_ms", o.delta_t_ms},
                                     {"speed_mps", e.true_mps},
                                     {"biased_speed_mps", e.biased_mps},
                                     {"error_mps", e.error_mps}};
    std::cout << out.dump(2) << '\n';
    return;
  }
  std::printf("p1 = (%.3f, %.3f) at t1 = %.0f ms\n", o.p1.x, o.p1.y, o.t1_ms);
  std::printf("p2 = (%.3f, %.3f) at t2 = %.0f ms, clock error %.0f ms\n", o.p2.x, o.p2.y,
              o.t2_ms, o.delta_t_ms);
  std::printf("speed           %.2f m/s\n", e.true_mps);
  std::printf("biased speed    %.2f m/s\n", e.biased_mps);
  std::printf("error           %.2f m/s\n", e.error_mps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor time-synchronization simulator"};
  app.require_subcommand(1);

  std::string run_file;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string csv_dir;
  auto* run = app.add_subcommand("run", "Run a scenario and emit its JSON report");
  run->add_option("file", run_file, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_path, "Write the report here instead of stdout");
  run->add_option("--csv", csv_dir, "Directory for per-series CSV dumps");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a scenario and print the effective config");
  validate->add_option("file", validate_file, "Scenario JSON file")->required();

  bool table_json = false;
  auto* table1 = app.add_subcommand("table1", "Tolerable sync error vs. velocity and IoU");
  table1->add_flag("--json", table_json, "Emit JSON");

  bool speed_json = false;
  auto* speed = app.add_subcommand("speed-example", "Inter-machine speed estimation example");
  speed->add_flag("--json", speed_json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      tsync::ScenarioConfig config = tsync::load_config(run_file);
      if (seed) config.seed = *seed;
      const tsync::Report report = tsync::run_scenario(config);
      const std::string text = tsync::report_to_json(report);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw tsync::Error("cannot write report to '" + out_path + "'");
        out << text;
      }
      if (!csv_dir.empty()) tsync::write_csv(report, csv_dir);
    } else if (*validate) {
      const tsync::ScenarioConfig config = tsync::load_config(validate_file);
      std::cout << tsync::config_to_json(config) << '\n';
    } else if (*table1) {
      print_table1(table_json);
    } else if (*speed) {
      print_speed_example(speed_json);
    }
  } catch (const tsync::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return 0;
}
