#include "bimodal/config.hpp"
#include "bimodal/esdf.hpp"
#include "bimodal/harness.hpp"
#include "bimodal/planner.hpp"
#include "bimodal/simulator.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace bimodal;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt_control;
  std::optional<double> replan_hz;
};

ScenarioConfig load_with_overrides(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = load_config(path);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.dt_control) cfg.sim.dt_control = *o.dt_control;
  if (o.replan_hz) cfg.sim.replan_hz = *o.replan_hz;
  cfg.validate();
  return cfg;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_plan(const std::string& path, const std::string& out_dir, const Overrides& o) {
  const ScenarioConfig cfg = load_with_overrides(path, o);
  const Esdf esdf = build_esdf(cfg.map.build_grid(), cfg.map.truncation);
  PlanRequest req;
  req.position = cfg.start.position;
  req.velocity = cfg.start.velocity;
  req.goal = cfg.goal;
  req.policy = SearchPolicy::for_mode(cfg.start.mode);
  const PlanOutcome outcome = plan_trajectory(req, esdf, nominal_bounds(cfg.vehicle), cfg.planner);
  const std::string dump = plan_dump_json(outcome, cfg.planner.search.primitive_duration / 2.0);
  if (out_dir.empty()) {
    std::cout << dump;
  } else {
    write_file(ensure_dir(out_dir) / "plan.json", dump);
  }
  std::cerr << "plan: " << to_string(outcome.search.status) << ", " << outcome.search.path.size()
            << " nodes, search " << outcome.search_ms << " ms, optimize " << outcome.optimize_ms
            << " ms\n";
  return outcome.ok() ? 0 : 1;
}

int cmd_simulate(const std::string& path, const std::string& out_dir, const Overrides& o,
                 const std::string& variant) {
  ScenarioConfig cfg = load_with_overrides(path, o);
  if (!variant.empty()) cfg.variant = variant_from_string(variant);
  const SimResult r = run_scenario(cfg);
  if (!out_dir.empty()) {
    const auto dir = ensure_dir(out_dir);
    std::ofstream log(dir / "log.csv");
    write_log_csv(r.log, log);
    std::ofstream events(dir / "events.csv");
    write_events_csv(r.log, events);
    write_file(dir / "metrics.json", metrics_json(r.metrics));
    emit_plots(r.log, (dir / "plots").string());
  }
  std::cout << metrics_json(r.metrics);
  return r.metrics.success ? 0 : 1;
}

int cmd_benchmark(const std::vector<std::string>& paths, const std::string& variants_arg,
                  const std::string& out_dir, const Overrides& o) {
  std::vector<ScenarioConfig> scenarios;
  for (const auto& p : paths) scenarios.push_back(load_with_overrides(p, o));
  std::vector<PlannerVariant> variants;
  std::stringstream ss(variants_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) variants.push_back(variant_from_string(item));
  }
  if (variants.empty()) throw InvalidArgument("--variants: no variants given");
  const BenchmarkReport report = run_benchmark(scenarios, variants);
  std::cout << report.to_table();
  if (!out_dir.empty()) write_file(ensure_dir(out_dir) / "report.json", report.to_json());
  else std::cout << report.to_json();
  return report.all_succeeded() && report.all_expectations_hold() ? 0 : 1;
}

int cmd_observe(const std::string& path, const std::string& log_path, const std::string& out_dir,
                const Overrides& o, std::optional<double> time_constant) {
  const ScenarioConfig cfg = load_with_overrides(path, o);
  SimLog log;
  if (log_path.empty()) {
    log = run_scenario(cfg).log;
  } else {
    std::ifstream in(log_path);
    if (!in) throw std::runtime_error("cannot open '" + log_path + "'");
    log = read_log_csv(in);
  }
  const double T = time_constant.value_or(cfg.observer.time_constant);
  const ObserverReplay replay = replay_observer(log, cfg.vehicle, T);
  std::ostringstream csv;
  csv << "time,mode,dhat_x,dhat_y,dhat_z,dtrue_x,dtrue_y,dtrue_z\n";
  csv.precision(17);
  for (std::size_t i = 0; i < replay.time.size(); ++i) {
    const auto& r = log.rows[i];
    const Vec3& d = replay.estimate[i];
    csv << replay.time[i] << ',' << to_string(r.mode) << ',' << d.x() << ',' << d.y() << ','
        << d.z() << ',' << r.d_true.x() << ',' << r.d_true.y() << ',' << r.d_true.z() << '\n';
  }
  if (out_dir.empty()) {
    std::cout << csv.str();
  } else {
    write_file(ensure_dir(out_dir) / "observer.csv", csv.str());
  }
  std::cerr << "observe: " << replay.time.size() << " rows, T=" << T
            << " s, mean |dhat - dtrue| = " << replay.mean_error_truth
            << " m/s^2, mean |dhat - logged| = " << replay.mean_error_logged << " m/s^2\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disturbance-aware planning and simulation for an air-land vehicle"};
  app.require_subcommand(1);

  std::string out_dir;
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", o.seed, "RNG seed for sensor noise");
    sub->add_option("--dt-control", o.dt_control, "Control period in seconds");
    sub->add_option("--replan-hz", o.replan_hz, "Replanning rate");
  };

  std::string cfg_path;
  auto* plan = app.add_subcommand("plan", "One-shot search and optimization; dumps the trajectory");
  plan->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);
  add_common(plan);

  std::string variant;
  auto* sim = app.add_subcommand("simulate", "Closed-loop run; writes the log and metrics");
  sim->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("--variant", variant, "adaptive or fixed_bounds (default: from the file)");
  add_common(sim);

  std::vector<std::string> bench_paths;
  std::string variants = "adaptive,fixed_bounds";
  auto* bench = app.add_subcommand("benchmark", "Runs scenarios under each variant");
  bench->add_option("configs", bench_paths, "Scenario files")->required()->check(CLI::ExistingFile);
  bench->add_option("--variants", variants, "Comma-separated variants");
  add_common(bench);

  std::string log_path;
  std::optional<double> time_constant;
  auto* obs = app.add_subcommand("observe", "Replays the disturbance estimator over a run");
  obs->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);
  obs->add_option("--log", log_path, "log.csv from simulate (default: simulate first)")
      ->check(CLI::ExistingFile);
  obs->add_option("--time-constant", time_constant, "Estimator time constant override");
  add_common(obs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return cmd_plan(cfg_path, out_dir, o);
    if (*sim) return cmd_simulate(cfg_path, out_dir, o, variant);
    if (*bench) return cmd_benchmark(bench_paths, variants, out_dir, o);
    if (*obs) return cmd_observe(cfg_path, log_path, out_dir, o, time_constant);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
