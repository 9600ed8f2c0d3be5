#include "bimodal/harness.hpp"

#include "bimodal/observer.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace bimodal {

using nlohmann::json;

namespace {

double metric_value(const Metrics& m, const std::string& name) {
  if (name == "time_s") return m.task_time;
  if (name == "energy_wh") return m.energy;
  return m.rmse;
}

void put(std::ostream& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

bool BenchmarkReport::all_succeeded() const {
  for (const auto& c : cells) {
    if (!c.ran || !c.metrics.success) return false;
  }
  return true;
}

bool BenchmarkReport::all_expectations_hold() const {
  for (const auto& e : expectations) {
    if (!e.passed) return false;
  }
  return true;
}

std::string BenchmarkReport::to_json() const {
  json doc;
  doc["baseline_note"] =
      "fixed_bounds approximates the reference planner by ablation: zero-disturbance bounds, no "
      "altitude/direction penalties, no mode switching";
  json cells_json = json::array();
  for (const auto& c : cells) {
    cells_json.push_back({{"scenario", c.scenario},
                          {"variant", std::string(to_string(c.variant))},
                          {"ran", c.ran},
                          {"error", c.error},
                          {"time_s", c.metrics.task_time},
                          {"energy_wh", c.metrics.energy},
                          {"rmse_m", c.metrics.rmse},
                          {"success", c.metrics.success},
                          {"mode_switches", c.switches},
                          {"detours", c.detours},
                          {"cycle_ms_median", c.cycle_ms_median},
                          {"wall_s", c.wall_seconds}});
  }
  doc["cells"] = cells_json;
  json exp = json::array();
  for (const auto& e : expectations) {
    exp.push_back({{"scenario", e.scenario},
                   {"metric", e.metric},
                   {"adaptive", e.adaptive},
                   {"baseline", e.baseline},
                   {"delta", e.adaptive - e.baseline},
                   {"passed", e.passed}});
  }
  doc["expectations"] = exp;
  doc["all_succeeded"] = all_succeeded();
  doc["all_expectations_hold"] = all_expectations_hold();
  return doc.dump(2) + "\n";
}

std::string BenchmarkReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(16) << "scenario" << std::setw(14) << "variant" << std::right
     << std::setw(10) << "time_s" << std::setw(11) << "energy_wh" << std::setw(10) << "rmse_m"
     << std::setw(9) << "success" << std::setw(10) << "switches" << "\n";
  os << std::fixed;
  for (const auto& c : cells) {
    os << std::left << std::setw(16) << c.scenario << std::setw(14) << to_string(c.variant)
       << std::right;
    if (!c.ran) {
      os << "  error: " << c.error << "\n";
      continue;
    }
    os << std::setw(10) << std::setprecision(3) << c.metrics.task_time << std::setw(11)
       << std::setprecision(4) << c.metrics.energy << std::setw(10) << std::setprecision(4)
       << c.metrics.rmse << std::setw(9) << (c.metrics.success ? "yes" : "no") << std::setw(10)
       << c.switches << "\n";
  }
  for (const auto& e : expectations) {
    os << "expect " << e.scenario << " " << e.metric << ": adaptive " << std::setprecision(4)
       << e.adaptive << " < baseline " << e.baseline << " -> " << (e.passed ? "PASS" : "FAIL")
       << "\n";
  }
  return os.str();
}

BenchmarkReport run_benchmark(const std::vector<ScenarioConfig>& scenarios,
                              const std::vector<PlannerVariant>& variants) {
  if (scenarios.empty()) throw InvalidArgument("run_benchmark: no scenarios");
  BenchmarkReport report;
  for (const ScenarioConfig& base : scenarios) {
    const Metrics* adaptive = nullptr;
    const Metrics* baseline = nullptr;
    const std::size_t first = report.cells.size();
    for (PlannerVariant v : variants) {
      BenchmarkCell cell;
      cell.scenario = base.name;
      cell.variant = v;
      ScenarioConfig cfg = base;
      cfg.variant = v;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SimResult r = run_scenario(cfg);
        cell.metrics = r.metrics;
        cell.ran = true;
        cell.cycle_ms_median = r.log.cycle_ms_median;
        for (const auto& e : r.log.events) {
          if (e.kind == EventKind::SwitchedToAir || e.kind == EventKind::SwitchedToLand) ++cell.switches;
          if (e.kind == EventKind::DetourReplanned) ++cell.detours;
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report.cells.push_back(cell);
    }
    for (std::size_t i = first; i < report.cells.size(); ++i) {
      const auto& c = report.cells[i];
      if (!c.ran) continue;
      if (c.variant == PlannerVariant::Adaptive) adaptive = &c.metrics;
      if (c.variant == PlannerVariant::FixedBounds) baseline = &c.metrics;
    }
    for (const std::string& metric : base.expect_lower) {
      BenchmarkExpectation e;
      e.scenario = base.name;
      e.metric = metric;
      if (adaptive && baseline) {
        e.adaptive = metric_value(*adaptive, metric);
        e.baseline = metric_value(*baseline, metric);
        e.passed = adaptive->success && e.adaptive < e.baseline;
      }
      report.expectations.push_back(e);
    }
  }
  return report;
}

void emit_plots(const SimLog& log, const std::string& out_dir) {
  if (log.rows.empty()) throw InvalidArgument("emit_plots: empty log");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir + "': " + ec.message());
  const fs::path dir(out_dir);

  {
    auto out = open_out(dir / "disturbance.csv");
    out << "time,mode,dhat_x,dhat_y,dhat_z,dtrue_x,dtrue_y,dtrue_z\n";
    for (const auto& r : log.rows) {
      put(out, r.time);
      out << ',' << to_string(r.mode);
      for (int i = 0; i < 3; ++i) {
        out << ',';
        put(out, r.d_hat[i]);
      }
      for (int i = 0; i < 3; ++i) {
        out << ',';
        put(out, r.d_true[i]);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "tracking.csv");
    out << "time";
    for (const char* axis : {"x", "y", "z"}) {
      out << ",ref_p" << axis << ",p" << axis << ",ref_v" << axis << ",v" << axis << ",ref_a"
          << axis << ",cmd_a" << axis << ",meas_a" << axis;
    }
    out << ",saturated\n";
    for (const auto& r : log.rows) {
      put(out, r.time);
      for (int i = 0; i < 3; ++i) {
        for (double v : {r.ref.position[i], r.state.position[i], r.ref.velocity[i],
                         r.state.velocity[i], r.ref.acceleration[i], r.accel_cmd[i],
                         r.accel_meas[i]}) {
          out << ',';
          put(out, v);
        }
      }
      out << ',' << (r.saturated ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_out(dir / "modes.csv");
    out << "time,mode,event\n";
    std::size_t next_event = 0;
    for (const auto& r : log.rows) {
      std::string event;
      while (next_event < log.events.size() && log.events[next_event].time <= r.time + 1e-12) {
        const auto k = log.events[next_event].kind;
        if (k == EventKind::SwitchedToAir || k == EventKind::SwitchedToLand) {
          event = std::string(to_string(k));
        }
        ++next_event;
      }
      put(out, r.time);
      out << ',' << to_string(r.mode) << ',' << event << '\n';
    }
  }
}

std::string plan_dump_json(const PlanOutcome& outcome, double knot_interval) {
  json doc;
  doc["status"] = std::string(to_string(outcome.search.status));
  doc["cost"] = outcome.search.cost;
  doc["expansions"] = outcome.search.expansions;
  doc["search_ms"] = outcome.search_ms;
  doc["optimize_ms"] = outcome.optimize_ms;
  json nodes = json::array();
  for (const auto& n : outcome.search.path) {
    nodes.push_back({{"position", {n.position.x(), n.position.y(), n.position.z()}},
                     {"velocity", {n.velocity.x(), n.velocity.y(), n.velocity.z()}},
                     {"accel",
                      {n.primitive.accel.x(), n.primitive.accel.y(), n.primitive.accel.z()}},
                     {"duration", n.primitive.duration},
                     {"g", n.g_cost},
                     {"h", n.h_cost},
                     {"mode", std::string(to_string(n.mode_tag))}});
  }
  doc["path"] = nodes;
  if (outcome.spline) {
    json ctrl = json::array();
    for (const auto& q : outcome.spline->control_points()) ctrl.push_back({q.x(), q.y(), q.z()});
    doc["trajectory"] = {{"degree", outcome.spline->degree()},
                         {"knot_interval", knot_interval},
                         {"control_points", ctrl},
                         {"initial_cost", outcome.optimization.initial_cost},
                         {"final_cost", outcome.optimization.final_cost},
                         {"iterations", outcome.optimization.iterations},
                         {"degraded", outcome.optimization.degraded}};
  }
  return doc.dump(2) + "\n";
}

SimLog read_log_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("log: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InvalidArgument("log: missing column '" + name + "'");
  };
  auto vec_cols = [&](const std::string& prefix, const char* a, const char* b, const char* c) {
    return std::array<std::size_t, 3>{col(prefix + a), col(prefix + b), col(prefix + c)};
  };
  const std::size_t c_time = col("time"), c_mode = col("mode");
  const auto c_p = vec_cols("p", "x", "y", "z"), c_v = vec_cols("v", "x", "y", "z");
  const auto c_att = std::array<std::size_t, 3>{col("roll"), col("pitch"), col("yaw")};
  const auto c_dhat = vec_cols("dhat_", "x", "y", "z"), c_dtrue = vec_cols("dtrue_", "x", "y", "z");
  const auto c_rp = vec_cols("ref_p", "x", "y", "z"), c_rv = vec_cols("ref_v", "x", "y", "z");
  const auto c_ra = vec_cols("ref_a", "x", "y", "z");
  const auto c_rpm = std::array<std::size_t, 4>{col("rpm1"), col("rpm2"), col("rpm3"), col("rpm4")};
  const std::size_t c_thrust = col("thrust"), c_wl = col("wheel_left"), c_wr = col("wheel_right");
  const std::size_t c_sat = col("saturated");

  SimLog log;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw InvalidArgument("log: line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(header.size()));
    }
    auto num = [&](std::size_t i) {
      double v = 0.0;
      const auto& s = cells[i];
      auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc()) {
        throw InvalidArgument("log: line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    auto vec = [&](const std::array<std::size_t, 3>& c) { return Vec3(num(c[0]), num(c[1]), num(c[2])); };
    LogRow r;
    r.time = num(c_time);
    r.mode = mode_from_string(cells[c_mode]);
    r.state.time = r.time;
    r.state.mode = r.mode;
    r.state.position = vec(c_p);
    r.state.velocity = vec(c_v);
    r.state.attitude = vec(c_att);
    r.ref.position = vec(c_rp);
    r.ref.velocity = vec(c_rv);
    r.ref.acceleration = vec(c_ra);
    r.d_hat = vec(c_dhat);
    r.d_true = vec(c_dtrue);
    r.thrust = num(c_thrust);
    r.wheel_left = num(c_wl);
    r.wheel_right = num(c_wr);
    for (int i = 0; i < 4; ++i) r.rpm[i] = num(c_rpm[i]);
    r.saturated = num(c_sat) != 0.0;
    log.rows.push_back(r);
  }
  if (log.rows.size() >= 2) log.dt = log.rows[1].time - log.rows[0].time;
  return log;
}

ObserverReplay replay_observer(const SimLog& log, const VehicleParams& p, double time_constant) {
  if (log.rows.empty()) throw InvalidArgument("replay_observer: empty log");
  ObserverReplay out;
  const auto prior = [&](Mode m) {
    return m == Mode::Air ? Vec3(0.0, 0.0, -p.gravity) : Vec3::Zero();
  };
  const LogRow& first = log.rows.front();
  UdeEstimator ude(time_constant, first.mode);
  ude.reset(first.mode, prior(first.mode), first.time);
  ude.prime(first.state.velocity, first.time);
  double err_truth = 0.0, err_logged = 0.0;
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const LogRow& r = log.rows[i];
    if (i > 0) {
      const LogRow& prev = log.rows[i - 1];
      if (r.mode != ude.mode()) {
        ude.reset(r.mode, prior(r.mode), r.time);
        ude.prime(r.state.velocity, r.time);
      } else {
        Vec3 u0 = prev.mode == Mode::Air
                      ? nominal_input_air(prev.thrust, prev.state.attitude, p)
                      : nominal_input_land(LandInput{prev.wheel_left, prev.wheel_right},
                                           prev.state.attitude.z(), p, prev.state.velocity);
        ude.update(r.state.velocity, u0, r.time - prev.time);
      }
    }
    out.time.push_back(r.time);
    out.estimate.push_back(ude.estimate());
    err_truth += (ude.estimate() - r.d_true).norm();
    err_logged += (ude.estimate() - r.d_hat).norm();
  }
  out.mean_error_truth = err_truth / log.rows.size();
  out.mean_error_logged = err_logged / log.rows.size();
  return out;
}

}  // namespace bimodal
