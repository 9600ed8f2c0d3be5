#include "bimodal/bounds.hpp"
#include "bimodal/config.hpp"
#include "bimodal/esdf.hpp"
#include "bimodal/harness.hpp"
#include "bimodal/observer.hpp"
#include "bimodal/optimize.hpp"
#include "bimodal/planner.hpp"
#include "bimodal/simulator.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace bimodal;

namespace {

// Scenario sources are either a path or the document text itself.
ScenarioConfig config_from(const std::string& source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string::npos &&
      (source[first] == '{' || source.compare(first, 2, "//") == 0)) {
    return parse_config(source);
  }
  return load_config(source);
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["time_s"] = m.task_time;
  d["energy_wh"] = m.energy;
  d["rmse_m"] = m.rmse;
  d["success"] = m.success;
  return d;
}

py::array_t<double> esdf_values(const OccupancyGrid& grid, const Esdf& esdf) {
  const Index3& d = grid.dims();
  py::array_t<double> out({d.x(), d.y(), d.z()});
  auto view = out.mutable_unchecked<3>();
  for (int x = 0; x < d.x(); ++x)
    for (int y = 0; y < d.y(); ++y)
      for (int z = 0; z < d.z(); ++z) view(x, y, z) = esdf.at(Index3(x, y, z));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Disturbance-adaptive planning and simulation for a flying/driving vehicle";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<Mode>(m, "Mode").value("Land", Mode::Land).value("Air", Mode::Air);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("mass", &VehicleParams::mass)
      .def_readwrite("gravity", &VehicleParams::gravity)
      .def_readwrite("thrust_max", &VehicleParams::thrust_max)
      .def_readwrite("drive_max", &VehicleParams::drive_max);

  py::class_<AccelBounds>(m, "AccelBounds")
      .def_readonly("min", &AccelBounds::min)
      .def_readonly("max", &AccelBounds::max)
      .def_readonly("mode", &AccelBounds::mode)
      .def("width", &AccelBounds::width)
      .def("contains", &AccelBounds::contains, py::arg("a"), py::arg("tol") = 0.0);

  m.def("air_bounds", &air_bounds, py::arg("d1_hat"), py::arg("params") = VehicleParams{});
  m.def("land_bounds", &land_bounds, py::arg("d2_hat"), py::arg("params") = VehicleParams{});
  m.def("softplus", &softplus, py::arg("x"), py::arg("beta"));

  py::class_<DisturbanceEstimate>(m, "DisturbanceEstimate")
      .def_readonly("value", &DisturbanceEstimate::value)
      .def_readonly("mode", &DisturbanceEstimate::mode)
      .def_readonly("age", &DisturbanceEstimate::age)
      .def_readonly("error", &DisturbanceEstimate::error);

  py::class_<UdeEstimator>(m, "UdeEstimator")
      .def(py::init<double, Mode>(), py::arg("time_constant") = 0.1, py::arg("mode") = Mode::Land)
      .def("reset", &UdeEstimator::reset, py::arg("mode"), py::arg("initial") = Vec3::Zero(),
           py::arg("time") = 0.0)
      .def("prime", &UdeEstimator::prime, py::arg("velocity"), py::arg("time"))
      .def("update", &UdeEstimator::update, py::arg("velocity"), py::arg("u0"), py::arg("dt"))
      .def_property_readonly("estimate", &UdeEstimator::estimate);

  m.def(
      "distance_field",
      [](py::array_t<bool, py::array::c_style | py::array::forcecast> occupied, const Vec3& origin,
         double resolution, double truncation) {
        if (occupied.ndim() != 3) throw InvalidArgument("occupied must be a 3-D array");
        const Index3 dims(occupied.shape(0), occupied.shape(1), occupied.shape(2));
        OccupancyGrid grid(origin, resolution, dims);
        auto view = occupied.unchecked<3>();
        for (int x = 0; x < dims.x(); ++x)
          for (int y = 0; y < dims.y(); ++y)
            for (int z = 0; z < dims.z(); ++z)
              if (view(x, y, z)) grid.set_occupied(Index3(x, y, z));
        return esdf_values(grid, build_esdf(grid, truncation));
      },
      py::arg("occupied"), py::arg("origin") = Vec3::Zero(), py::arg("resolution") = 1.0,
      py::arg("truncation") = 2.0,
      "Distance from each voxel centre to the nearest occupied centre, indexed [x, y, z].");

  m.def(
      "validate_config",
      [](const std::string& source) { return serialize_config(config_from(source)); },
      py::arg("source"), "Loads a scenario (path or text) and returns it with every default filled in.");

  m.def(
      "plan",
      [](const std::string& source) {
        const ScenarioConfig cfg = config_from(source);
        const Esdf esdf = build_esdf(cfg.map.build_grid(), cfg.map.truncation);
        PlanRequest req;
        req.position = cfg.start.position;
        req.velocity = cfg.start.velocity;
        req.goal = cfg.goal;
        req.policy = SearchPolicy::for_mode(cfg.start.mode);
        const PlanOutcome out = plan_trajectory(req, esdf, nominal_bounds(cfg.vehicle), cfg.planner);
        return plan_dump_json(out, cfg.planner.search.primitive_duration / 2.0);
      },
      py::arg("source"), "One search and optimization from the scenario start; returns JSON text.");

  m.def(
      "simulate",
      [](const std::string& source, std::optional<std::string> variant) {
        ScenarioConfig cfg = config_from(source);
        if (variant) cfg.variant = variant_from_string(*variant);
        SimResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(cfg);
        }
        std::ostringstream log, events;
        write_log_csv(r.log, log);
        write_events_csv(r.log, events);
        py::dict d;
        d["metrics"] = metrics_dict(r.metrics);
        d["log_csv"] = log.str();
        d["events_csv"] = events.str();
        d["cycle_ms_median"] = r.log.cycle_ms_median;
        return d;
      },
      py::arg("source"), py::arg("variant") = py::none(),
      "Closed-loop run; returns metrics plus the log and events as CSV text.");

  m.def(
      "benchmark",
      [](const std::vector<std::string>& sources, const std::vector<std::string>& variants) {
        std::vector<ScenarioConfig> cfgs;
        for (const auto& s : sources) cfgs.push_back(config_from(s));
        std::vector<PlannerVariant> vs;
        for (const auto& v : variants) vs.push_back(variant_from_string(v));
        py::gil_scoped_release release;
        return run_benchmark(cfgs, vs).to_json();
      },
      py::arg("sources"), py::arg("variants") = std::vector<std::string>{"adaptive", "fixed_bounds"},
      "Runs every scenario under every variant; returns the report as JSON text.");

  m.def("compute_energy_wh",
        [](const std::vector<std::array<double, 4>>& rpms, double dt, double k_torque) {
          SimLog log;
          log.dt = dt;
          for (std::size_t i = 0; i < rpms.size(); ++i) {
            LogRow r;
            r.time = static_cast<double>(i) * dt;
            r.mode = Mode::Air;
            r.rpm = rpms[i];
            log.rows.push_back(r);
          }
          return compute_metrics(log, k_torque, k_torque).energy;
        },
        py::arg("rpms"), py::arg("dt"), py::arg("k_torque"),
        "Rectangle-rule motor energy in Wh for per-tick motor speeds.");
}
