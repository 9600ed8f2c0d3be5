#include "bimodal/config.hpp"
#include "bimodal/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <json.hpp>

using namespace bimodal;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "map": {"origin": [-2, -3, -0.2], "resolution": 0.1, "dims": [100, 60, 30]},
  "start": {"position": [0, 0, 0]},
  "goal": [5, 0, 0]
})";

std::string fixture(const std::string& name) {
  return std::string(BIMODAL_SOURCE_DIR) + "/scenarios/" + name;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bimodal_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BIMODAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ScenarioConfig windy_air() {
  ScenarioConfig c = parse_config(kMinimal);
  c.start.mode = Mode::Air;
  c.start.position = Vec3(0, 0, 1.0);
  c.goal = Vec3(5, 0, 1.0);
  WindZone w;
  w.min = Vec3(-5, -5, -1);
  w.max = Vec3(20, 20, 5);
  w.force = Vec3(3, 0, 0);
  c.wind_zones = {w};
  c.switching.air_threshold = 100.0;
  return c;
}

}  // namespace

// ---- configuration ----

TEST(Config, MinimalDocumentTakesDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.goal, Vec3(5, 0, 0));
  EXPECT_EQ(c.start.mode, Mode::Land);
  EXPECT_EQ(c.variant, PlannerVariant::Adaptive);
  EXPECT_EQ(c.sim.dt_control, SimConfig{}.dt_control);
  EXPECT_EQ(c.switching.horizon, SwitchConfig{}.horizon);
  EXPECT_EQ(c.vehicle.mass, VehicleParams{}.mass);
}

TEST(Config, GoalOutsideMapNamesTheField) {
  std::string text = kMinimal;
  text.replace(text.find("[5, 0, 0]"), 9, "[50, 0, 0]");
  try {
    parse_config(text);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "goal");
    EXPECT_NE(std::string(e.what()).find("goal"), std::string::npos);
  }
}

TEST(Config, UnknownKeyIsRejected) {
  std::string text = kMinimal;
  text.replace(text.find("\"goal\""), 6, "\"speed\": 3, \"goal\"");
  try {
    parse_config(text);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("speed"), std::string::npos) << e.what();
  }
}

TEST(Config, WrongTypeNamesNestedField) {
  std::string text = kMinimal;
  text.replace(text.find("\"resolution\": 0.1"), 17, "\"resolution\": \"fine\"");
  try {
    parse_config(text);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "map.resolution");
  }
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
  const std::string text = "{\n  \"goal\": [1, 2, 3],\n  \"map\": {\"resolution\": 0.1,,}\n}";
  try {
    parse_config(text);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3) << e.what();
    EXPECT_GT(e.column(), 0);
  }
}

TEST(Config, CommentsAreAllowed) {
  const std::string text = std::string("// leading note\n") + kMinimal;
  EXPECT_NO_THROW(parse_config(text));
}

TEST(Config, RoundTripIsIdentity) {
  for (const char* name : {"leftright.cfg", "land2air.cfg", "air2land.cfg"}) {
    const auto a = load_config(fixture(name));
    const auto text = serialize_config(a);
    const auto b = parse_config(text);
    EXPECT_TRUE(a == b) << name;
    EXPECT_EQ(text, serialize_config(b)) << name;
  }
}

TEST(Config, EqualityNoticesChanges) {
  const auto a = load_config(fixture("leftright.cfg"));
  auto b = a;
  EXPECT_TRUE(a == b);
  b.resistance_zones.front().viscous += 1e-9;
  EXPECT_FALSE(a == b);
  b = a;
  b.planner.search.heuristic_weight = 2.0;
  EXPECT_FALSE(a == b);
}

TEST(Config, MissingFileIsAConfigError) {
  EXPECT_THROW(load_config("/nonexistent/file.cfg"), ConfigError);
}

// ---- benchmark ----

TEST(Benchmark, FixtureOrderingsHold) {
  std::vector<ScenarioConfig> scenarios;
  for (const char* name : {"leftright.cfg", "land2air.cfg", "air2land.cfg"}) {
    scenarios.push_back(load_config(fixture(name)));
  }
  const auto report =
      run_benchmark(scenarios, {PlannerVariant::Adaptive, PlannerVariant::FixedBounds});
  EXPECT_EQ(report.cells.size(), 6u);
  EXPECT_TRUE(report.all_succeeded());
  ASSERT_EQ(report.expectations.size(), 6u);
  for (const auto& e : report.expectations) {
    EXPECT_TRUE(e.passed) << e.scenario << " " << e.metric << ": " << e.adaptive << " vs "
                          << e.baseline;
    EXPECT_LT(e.adaptive, e.baseline);
  }
  EXPECT_TRUE(report.all_expectations_hold());

  // Every cell appears in the JSON report; nothing is dropped.
  const auto j = nlohmann::json::parse(report.to_json());
  ASSERT_TRUE(j.contains("cells"));
  EXPECT_EQ(j["cells"].size(), report.cells.size());
  EXPECT_FALSE(report.to_table().empty());
}

TEST(Benchmark, CellFailureIsRecordedAndRunContinues) {
  auto good = parse_config(kMinimal);
  good.name = "good";
  auto bad = good;
  bad.name = "bad";
  bad.goal = Vec3(500, 0, 0);  // invalid; run_scenario throws
  const auto report = run_benchmark({bad, good}, {PlannerVariant::Adaptive});
  ASSERT_EQ(report.cells.size(), 2u);
  EXPECT_FALSE(report.cells[0].ran);
  EXPECT_FALSE(report.cells[0].error.empty());
  EXPECT_TRUE(report.cells[1].ran);
  EXPECT_TRUE(report.cells[1].metrics.success);
  EXPECT_FALSE(report.all_succeeded());
}

TEST(Benchmark, VariantsAgreeWithoutDisturbance) {
  auto c = parse_config(kMinimal);
  c.observer.velocity_noise = 0.0;
  const auto report =
      run_benchmark({c}, {PlannerVariant::Adaptive, PlannerVariant::FixedBounds});
  ASSERT_EQ(report.cells.size(), 2u);
  const auto& a = report.cells[0].metrics;
  const auto& b = report.cells[1].metrics;
  EXPECT_TRUE(a.success && b.success);
  EXPECT_NEAR(a.task_time, b.task_time, 1e-9);
  EXPECT_NEAR(a.energy, b.energy, 1e-9);
  EXPECT_NEAR(a.rmse, b.rmse, 1e-9);
}

// ---- plots and logs ----

TEST(EmitPlots, RowCountsMatchLog) {
  const auto r = run_scenario(windy_air());
  const auto dir = scratch("plots");
  emit_plots(r.log, dir.string());
  for (const char* f : {"disturbance.csv", "tracking.csv", "modes.csv"}) {
    ASSERT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(count_lines(dir / f), r.log.rows.size() + 1) << f;
  }
}

TEST(EmitPlots, DisturbanceEstimateConvergesToInjectedConstant) {
  const auto r = run_scenario(windy_air());
  const auto dir = scratch("plots_conv");
  emit_plots(r.log, dir.string());
  std::ifstream in(dir / "disturbance.csv");
  std::string line, last;
  while (std::getline(in, line)) last = line;
  std::stringstream ss(last);
  std::vector<std::string> cells;
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 6u);
  const double dhat_x = std::stod(cells[2]);
  const double injected = -3.0 / VehicleParams{}.mass;  // d1 = −d_air/m along x
  EXPECT_NEAR(dhat_x, injected, 0.05 * std::abs(injected));
}

TEST(EmitPlots, ModeTimelineMatchesSwitchEvents) {
  const auto r = run_scenario(load_config(fixture("land2air.cfg")));
  const auto dir = scratch("plots_modes");
  emit_plots(r.log, dir.string());
  std::size_t switches = 0;
  for (const auto& e : r.log.events) {
    if (e.kind == EventKind::SwitchedToAir || e.kind == EventKind::SwitchedToLand) ++switches;
  }
  ASSERT_GE(switches, 1u);
  std::ifstream in(dir / "modes.csv");
  std::string line;
  std::getline(in, line);
  std::size_t marked = 0;
  while (std::getline(in, line)) {
    if (line.find("switched_to_") != std::string::npos) ++marked;
  }
  EXPECT_EQ(marked, switches);
}

TEST(EmitPlots, EmptyLogAndUnwritableDirectoryFail) {
  EXPECT_THROW(emit_plots(SimLog{}, scratch("empty").string()), std::invalid_argument);
  const auto r = run_scenario(parse_config(kMinimal));
  const auto blocker = scratch("blocker");
  std::ofstream(blocker.string()) << "file";
  EXPECT_THROW(emit_plots(r.log, (blocker / "sub").string()), std::runtime_error);
  fs::remove(blocker);
}

TEST(LogCsv, ReadBackMatchesWrittenLog) {
  const auto r = run_scenario(windy_air());
  std::stringstream io;
  write_log_csv(r.log, io);
  const auto back = read_log_csv(io);
  ASSERT_EQ(back.rows.size(), r.log.rows.size());
  EXPECT_NEAR(back.dt, r.log.dt, 1e-12);
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    const auto& a = r.log.rows[i];
    const auto& b = back.rows[i];
    EXPECT_EQ(a.time, b.time);
    EXPECT_EQ(a.mode, b.mode);
    EXPECT_EQ(a.state.position, b.state.position);
    EXPECT_EQ(a.d_hat, b.d_hat);
    EXPECT_EQ(a.rpm, b.rpm);
  }
}

TEST(ObserverReplay, TracksTheLoggedEstimate) {
  const auto r = run_scenario(windy_air());
  const auto replay = replay_observer(r.log, VehicleParams{}, 0.1);
  ASSERT_EQ(replay.estimate.size(), r.log.rows.size());
  // Replay runs at the control rate rather than inside the dynamics loop, so
  // it approximates the in-loop estimate.
  EXPECT_LT(replay.mean_error_logged, 0.2);
  EXPECT_LT(replay.mean_error_truth, 0.3);
  EXPECT_NEAR(replay.estimate.back().x(), r.log.rows.back().d_true.x(), 0.1);
}

// ---- command line ----

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  const std::string lr = fixture("leftright.cfg");
  EXPECT_EQ(run_cli("plan " + lr + " --out " + (out / "plan").string()), 0);
  EXPECT_TRUE(fs::exists(out / "plan" / "plan.json"));
  EXPECT_EQ(run_cli("simulate " + lr + " --out " + (out / "sim").string()), 0);
  for (const char* f : {"log.csv", "events.csv", "metrics.json", "plots/tracking.csv"}) {
    EXPECT_TRUE(fs::exists(out / "sim" / f)) << f;
  }
  EXPECT_EQ(run_cli("observe " + lr + " --log " + (out / "sim" / "log.csv").string()), 0);
  EXPECT_EQ(run_cli("benchmark " + lr + " --variants adaptive,fixed_bounds --out " +
                    (out / "bench").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "bench" / "report.json"));

  // A run that cannot finish exits non-zero.
  auto hold = load_config(lr);
  hold.sim.hold_position = true;
  hold.sim.timeout = 2.0;
  const auto hold_path = out / "hold.cfg";
  std::ofstream(hold_path) << serialize_config(hold);
  EXPECT_EQ(run_cli("simulate " + hold_path.string()), 1);

  // Broken configuration and bad arguments.
  const auto broken = out / "broken.cfg";
  std::ofstream(broken) << "{ \"goal\": [1, 2 }";
  EXPECT_EQ(run_cli("simulate " + broken.string()), 2);
  EXPECT_EQ(run_cli("benchmark " + lr + " --variants nonsense"), 2);
  EXPECT_NE(run_cli("simulate /nonexistent.cfg"), 0);
  EXPECT_NE(run_cli(""), 0);
}
