#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsync/error.hpp"
#include "tsync/impact.hpp"
#include "tsync/scenario.hpp"
#include "tsync/syncproto.hpp"
#include "tsync/timebase.hpp"
#include "tsync/units.hpp"

namespace py = pybind11;
using namespace tsync;

namespace {

ScenarioConfig load(const std::string& source) {
  // A document starts with '{'; anything else is a path.
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && source[first] == '{') return parse_config(source);
  return load_config(std::filesystem::path(source));
}

ClockState clock(Nanos offset, double drift_ppm) {
  ClockModel m;
  m.initial_offset = offset;
  m.drift = Ppb::from_ppm(drift_ppm);
  return make_clock(m);
}

py::dict speed_dict(const SpeedEstimate& e) {
  py::dict d;
  d["true_mps"] = e.true_mps;
  d["biased_mps"] = e.biased_mps;
  d["error_mps"] = e.error_mps;
  return d;
}

Position position(const std::vector<double>& p) {
  if (p.size() < 2 || p.size() > 3) throw DomainError("positions need 2 or 3 coordinates");
  return Position{p[0], p[1], p.size() == 3 ? p[2] : 0.0};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time synchronization simulator core";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<DomainError> domain_error(m, "DomainError", PyExc_ValueError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<RateError> rate_error(m, "RateError", config_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const RateError& e) {
      py::set_error(rate_error, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("parse_duration", [](const std::string& s) { return parse_duration(s); });
  m.def("format_duration", &format_duration);

  m.def(
      "local_from_true",
      [](Nanos t, Nanos offset, double drift_ppm) {
        return local_from_true(clock(offset, drift_ppm), TrueTime{t}).ns;
      },
      py::arg("t_ns"), py::arg("offset_ns") = 0, py::arg("drift_ppm") = 0.0);
  m.def(
      "true_from_local",
      [](Nanos l, Nanos offset, double drift_ppm) {
        return true_from_local(clock(offset, drift_ppm), LocalTime{l}).ns;
      },
      py::arg("l_ns"), py::arg("offset_ns") = 0, py::arg("drift_ppm") = 0.0);

  m.def(
      "offset_and_delay",
      [](Nanos t1, Nanos t2, Nanos t3, Nanos t4) {
        const auto r = offset_and_delay(
            SyncExchange{LocalTime{t1}, LocalTime{t2}, LocalTime{t3}, LocalTime{t4}});
        return py::make_tuple(r.offset, r.mean_path_delay);
      },
      py::arg("t1"), py::arg("t2"), py::arg("t3"), py::arg("t4"));

  m.def("iou_1d", &iou_1d, py::arg("length_m"), py::arg("displacement_m"));
  m.def(
      "tolerable_sync_error_ms",
      [](double v, double theta, double length, bool exact) -> py::object {
        const ToleranceQuery q{v, theta, length};
        if (exact) return py::float_(tolerable_sync_error_exact_ms(q));
        return py::int_(tolerable_sync_error_ms(q));
      },
      py::arg("velocity_mps"), py::arg("iou_threshold"),
      py::arg("object_length_m") = kDefaultObjectLength, py::arg("exact") = false);
  m.def(
      "speed_estimate",
      [](const std::vector<double>& p1, const std::vector<double>& p2, double t1_ms, double t2_ms,
         double delta_t_ms) {
        return speed_dict(speed_estimate({position(p1), position(p2), t1_ms, t2_ms, delta_t_ms}));
      },
      py::arg("p1"), py::arg("p2"), py::arg("t1_ms"), py::arg("t2_ms"), py::arg("delta_t_ms"));

  m.def("builtin_table1", [] {
    const Table1 t = builtin_table1();
    py::dict out;
    for (std::size_t row = 0; row < t.iou_thresholds.size(); ++row) {
      py::dict cells;
      for (std::size_t col = 0; col < t.velocities_mps.size(); ++col) {
        cells[py::float_(t.velocities_mps[col])] = t.cells[row][col];
      }
      out[py::float_(t.iou_thresholds[row])] = cells;
    }
    return out;
  });
  m.def("builtin_speed_example", [] { return speed_dict(builtin_speed_example().estimate); });

  m.def(
      "validate_config", [](const std::string& source) { return config_to_json(load(source)); },
      py::arg("source"), "Parses a config path or JSON document; returns the effective config.");
  m.def(
      "run_scenario",
      [](const std::string& source, std::optional<std::uint64_t> seed) {
        ScenarioConfig config = load(source);
        if (seed) config.seed = *seed;
        py::gil_scoped_release release;
        return report_to_json(run_scenario(config));
      },
      py::arg("source"), py::arg("seed") = py::none());
  m.def(
      "run_sweep",
      [](const std::string& source, const std::vector<std::uint64_t>& seeds, unsigned threads) {
        const ScenarioConfig config = load(source);
        std::vector<std::string> out;
        {
          py::gil_scoped_release release;
          for (const auto& r : run_sweep(config, seeds, threads)) out.push_back(report_to_json(r));
        }
        return out;
      },
      py::arg("source"), py::arg("seeds"), py::arg("threads") = 1);
}
