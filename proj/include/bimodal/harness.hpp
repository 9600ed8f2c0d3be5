#pragma once

#include "bimodal/scenario.hpp"
#include "bimodal/simulator.hpp"

#include <string>
#include <vector>

namespace bimodal {

struct BenchmarkCell {
  std::string scenario;
  PlannerVariant variant = PlannerVariant::Adaptive;
  Metrics metrics;
  bool ran = false;        // false when the run threw
  std::string error;
  double wall_seconds = 0.0;
  double cycle_ms_median = 0.0;
  int switches = 0;
  int detours = 0;
};

struct BenchmarkExpectation {
  std::string scenario;
  std::string metric;      // "time_s", "energy_wh" or "rmse_m"
  double adaptive = 0.0;
  double baseline = 0.0;
  bool passed = false;
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;
  std::vector<BenchmarkExpectation> expectations;

  bool all_succeeded() const;
  bool all_expectations_hold() const;
  std::string to_json() const;
  std::string to_table() const;
};

/// Runs every scenario under every variant. A cell that throws is recorded
/// with its error and the run continues. The baseline freezes bounds at their
/// zero-disturbance values, drops the altitude and direction penalties and
/// disables mode switching.
BenchmarkReport run_benchmark(const std::vector<ScenarioConfig>& scenarios,
                              const std::vector<PlannerVariant>& variants);

/// Writes disturbance.csv, tracking.csv and modes.csv under `out_dir`
/// (created if missing). Throws std::runtime_error when it cannot write.
void emit_plots(const SimLog& log, const std::string& out_dir);

/// Path and trajectory dump for `plan`: search nodes, primitives and the
/// optimized control points.
std::string plan_dump_json(const PlanOutcome& outcome, double knot_interval);

/// Parses a log written by write_log_csv. Columns are matched by name.
SimLog read_log_csv(std::istream& in);

struct ObserverReplay {
  std::vector<double> time;
  std::vector<Vec3> estimate;  // replayed d̂ per log row
  double mean_error_truth = 0.0;   // mean ‖d̂ − d_true‖ over rows
  double mean_error_logged = 0.0;  // mean ‖d̂ − logged d̂‖ over rows
};

/// Re-runs the estimator over a logged run at the log's rate, rebuilding the
/// nominal input from the logged commands and attitude. Mode changes reset
/// the estimator with the same priors as the simulator.
ObserverReplay replay_observer(const SimLog& log, const VehicleParams& p, double time_constant);

}  // namespace bimodal
