#include "bimodal/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace bimodal;

namespace {

ScenarioConfig open_land_run() {
  ScenarioConfig c;
  c.map.origin = Vec3(-2, -3, -0.2);
  c.map.resolution = 0.1;
  c.map.dims = Index3(100, 60, 30);
  c.start.position = Vec3(0, 0, 0);
  c.goal = Vec3(5, 0, 0);
  c.sim.timeout = 20.0;
  return c;
}

ScenarioConfig windy_air_run() {
  ScenarioConfig c = open_land_run();
  c.start.mode = Mode::Air;
  c.start.position = Vec3(0, 0, 1.0);
  c.goal = Vec3(5, 0, 1.0);
  WindZone w;
  w.min = Vec3(-5, -5, -1);
  w.max = Vec3(20, 20, 5);
  w.force = Vec3(3, 0, 0);
  c.wind_zones = {w};
  c.switching.air_threshold = 100.0;  // stay airborne; this run exercises tracking
  return c;
}

const SimResult& land_result() {
  static const SimResult r = run_scenario(open_land_run());
  return r;
}

const SimResult& air_result() {
  static const SimResult r = run_scenario(windy_air_run());
  return r;
}

VehicleState ground_state(const Vec3& v, double yaw = 0.0) {
  VehicleState s;
  s.mode = Mode::Land;
  s.velocity = v;
  s.attitude.z() = yaw;
  return s;
}

}  // namespace

// ---- disturbance fields ----

TEST(SampleDisturbance, OutsideEveryZoneIsZero) {
  DisturbanceFields f;
  WindZone w;
  w.min = Vec3(10, 10, 0);
  w.max = Vec3(11, 11, 1);
  w.force = Vec3(-3, 0, 0);
  f.wind = {w};
  ResistanceZone z;
  z.min = Vec2(10, 10);
  z.max = Vec2(11, 11);
  z.friction = 0.3;
  f.resistance = {z};
  const auto d = sample_disturbance(f, ground_state(Vec3(1, 0, 0)), VehicleParams{});
  EXPECT_EQ(d.d_air, Vec3::Zero());
  EXPECT_EQ(d.ground.as_vector(), Vec3::Zero());
  EXPECT_EQ(d.ground.extra_moment, 0.0);
}

TEST(SampleDisturbance, SingleWindZone) {
  DisturbanceFields f;
  WindZone w;
  w.min = Vec3(-1, -1, 0);
  w.max = Vec3(1, 1, 2);
  w.force = Vec3(-3, 0, 0);
  f.wind = {w};
  VehicleState s;
  s.mode = Mode::Air;
  s.position = Vec3(0, 0, 1);
  EXPECT_LT((sample_disturbance(f, s, VehicleParams{}).d_air - Vec3(-3, 0, 0)).norm(), 1e-15);
}

TEST(SampleDisturbance, WindZonesSuperposeAndGust) {
  DisturbanceFields f;
  WindZone a, b;
  a.min = b.min = Vec3(-1, -1, 0);
  a.max = b.max = Vec3(1, 1, 2);
  a.force = Vec3(-3, 0, 0);
  b.force = Vec3(0, 2, 0);
  b.gust_amplitude = 1.0;
  b.gust_frequency = 0.5;
  f.wind = {a, b};
  VehicleState s;
  s.mode = Mode::Air;
  s.position = Vec3(0, 0, 1);
  s.time = 0.5;  // sin(2π·0.5·0.5) = 1
  EXPECT_LT((sample_disturbance(f, s, VehicleParams{}).d_air - Vec3(-3, 3, 0)).norm(), 1e-12);
}

TEST(SampleDisturbance, FrictionExampleOpposesForwardMotion) {
  VehicleParams p;  // m = 2
  DisturbanceFields f;
  ResistanceZone z;
  z.min = Vec2(-5, -5);
  z.max = Vec2(5, 5);
  z.friction = 0.3;
  f.resistance = {z};
  const auto d = sample_disturbance(f, ground_state(Vec3(1, 0, 0)), p);
  // Resistance magnitude 0.3·2·9.81 (tanh(20) = 1 to double precision).
  EXPECT_NEAR(d.ground.total_longitudinal(), 0.3 * 2.0 * p.gravity, 1e-9);
  EXPECT_NEAR(d.ground.total_lateral(), 0.0, 1e-12);
  // The force acting on the vehicle is −5.886 N along its heading.
  const Vec3 applied = -rotate_yaw(d.ground.as_vector(), 0.0);
  EXPECT_NEAR(applied.x(), -5.886, 1e-3);
  // Same magnitude driving backwards, opposite sign.
  const auto back = sample_disturbance(f, ground_state(Vec3(-1, 0, 0)), p);
  EXPECT_NEAR(back.ground.total_longitudinal(), -0.3 * 2.0 * p.gravity, 1e-9);
}

TEST(SampleDisturbance, FrictionIsSmoothNearStandstill) {
  DisturbanceFields f;
  ResistanceZone z;
  z.min = Vec2(-5, -5);
  z.max = Vec2(5, 5);
  z.friction = 0.3;
  f.resistance = {z};
  const VehicleParams p;
  const double at_rest = sample_disturbance(f, ground_state(Vec3::Zero()), p).ground.total_longitudinal();
  EXPECT_EQ(at_rest, 0.0);
  const double slow = sample_disturbance(f, ground_state(Vec3(0.01, 0, 0)), p).ground.total_longitudinal();
  EXPECT_NEAR(slow, 0.3 * 2.0 * p.gravity * std::tanh(0.01 / 0.05), 1e-9);
}

TEST(SampleDisturbance, WindDoesNotTouchGroundResistanceInAir) {
  DisturbanceFields f;
  ResistanceZone z;
  z.min = Vec2(-5, -5);
  z.max = Vec2(5, 5);
  z.friction = 0.3;
  f.resistance = {z};
  VehicleState s;
  s.mode = Mode::Air;
  s.velocity = Vec3(1, 0, 0);
  EXPECT_EQ(sample_disturbance(f, s, VehicleParams{}).ground.as_vector(), Vec3::Zero());
}

TEST(TrueDisturbance, MatchesObserverConvention) {
  VehicleParams p;
  SampledDisturbance d;
  d.d_air = Vec3(4, 0, 0);
  VehicleState air;
  air.mode = Mode::Air;
  EXPECT_LT((true_disturbance_accel(d, air, p) - Vec3(-2, 0, -p.gravity)).norm(), 1e-12);
  d.ground.longitudinal = {1, 1, 1, 1};
  const auto ground = true_disturbance_accel(d, ground_state(Vec3::Zero(), std::numbers::pi / 2), p);
  EXPECT_LT((ground - Vec3(0, -2, 0)).norm(), 1e-12);
}

// ---- tracking controllers ----

TEST(TrackAir, HoverInversion) {
  VehicleParams p;
  VehicleState s;
  s.mode = Mode::Air;
  s.position = Vec3(0, 0, 1);
  Reference ref;
  ref.position = s.position;
  const auto c = track_air(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_NEAR(c.input.thrust, p.mass * p.gravity, 1e-12);
  EXPECT_LT(c.attitude.norm(), 1e-12);
  EXPECT_FALSE(c.saturated);
}

TEST(TrackAir, ForwardAccelerationTiltsByAtanRatio) {
  VehicleParams p;
  VehicleState s;
  s.mode = Mode::Air;
  Reference ref;
  ref.acceleration = Vec3(1, 0, 0);
  const auto c = track_air(ref, s, std::nullopt, TrackingGains{}, p);
  const double expected = std::atan(1.0 / p.gravity);
  EXPECT_NEAR(std::abs(c.attitude.y()), expected, 1e-9);
  EXPECT_NEAR(expected * 180.0 / std::numbers::pi, 5.82, 0.01);
  // The resulting thrust axis points the force where it was asked for.
  const Vec3 force = c.input.thrust * thrust_axis(c.attitude);
  EXPECT_LT((force - p.mass * Vec3(1, 0, p.gravity)).norm(), 1e-9);
}

TEST(TrackAir, EstimateReplacesNominalGravity) {
  VehicleParams p;
  VehicleState s;
  s.mode = Mode::Air;
  Reference ref;
  const auto c = track_air(ref, s, Vec3(-1, 0, -p.gravity), TrackingGains{}, p);
  const Vec3 force = c.input.thrust * thrust_axis(c.attitude);
  EXPECT_LT((force - p.mass * Vec3(1, 0, p.gravity)).norm(), 1e-9);
}

TEST(TrackAir, ExcessiveDemandSaturates) {
  VehicleParams p;
  VehicleState s;
  s.mode = Mode::Air;
  Reference ref;
  ref.acceleration = Vec3(50, 0, 0);
  const auto c = track_air(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_TRUE(c.saturated);
  EXPECT_LE(c.input.thrust, p.thrust_max.z() + 1e-9);
  ref.acceleration = Vec3(0, 0, -30);  // would need negative thrust
  const auto d = track_air(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_TRUE(d.saturated);
  EXPECT_GE(d.input.thrust, 0.0);
}

TEST(TrackLand, StraightReferenceWithoutErrorIsSymmetric) {
  VehicleParams p;
  const auto s = ground_state(Vec3(1, 0, 0));
  Reference ref;
  ref.velocity = Vec3(1, 0, 0);
  const auto c = track_land(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_NEAR(c.input.left, c.input.right, 1e-12);
  EXPECT_NEAR(c.input.left, 0.0, 1e-12);
  EXPECT_FALSE(c.saturated);
}

TEST(TrackLand, PositiveHeadingErrorDrivesRightSideHarder) {
  VehicleParams p;
  const auto s = ground_state(Vec3(1, 0, 0));
  Reference ref;
  ref.velocity = Vec3(std::cos(0.1), std::sin(0.1), 0.0);
  const auto c = track_land(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_GT(c.input.right, c.input.left);
  EXPECT_GT(c.heading, 0.0);
  // The differential really yaws the vehicle in the positive sense.
  EXPECT_GT(land_yaw_accel(c.input, 0.0, p), 0.0);
}

TEST(TrackLand, ReferenceAheadPushesForward) {
  VehicleParams p;
  const auto s = ground_state(Vec3::Zero());
  Reference ref;
  ref.position = Vec3(1, 0, 0);
  const auto c = track_land(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_GT(c.input.left + c.input.right, 0.0);
  EXPECT_NEAR(c.input.left, c.input.right, 1e-12);
}

TEST(TrackLand, WheelForcesStayWithinLimits) {
  VehicleParams p;
  const auto s = ground_state(Vec3::Zero(), 1.0);
  Reference ref;
  ref.position = Vec3(-20, 30, 0);
  const auto c = track_land(ref, s, std::nullopt, TrackingGains{}, p);
  EXPECT_TRUE(c.saturated);
  EXPECT_LE(std::abs(c.input.left), p.wheel_force_max() + 1e-12);
  EXPECT_LE(std::abs(c.input.right), p.wheel_force_max() + 1e-12);
}

// ---- metrics ----

TEST(Metrics, EmptyLog) {
  const auto m = compute_metrics(SimLog{}, 1e-8, 1e-8);
  EXPECT_TRUE(m.empty);
  EXPECT_EQ(m.energy, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.task_time, 0.0);
}

TEST(Metrics, SingleMotorEnergyExample) {
  SimLog log;
  log.dt = 0.01;
  for (int i = 0; i < 1000; ++i) {
    LogRow r;
    r.time = i * log.dt;
    r.mode = Mode::Air;
    r.rpm = {5000.0, 0.0, 0.0, 0.0};
    log.rows.push_back(r);
  }
  const auto m = compute_metrics(log, 1e-8, 0.0);
  // 1e-8·5000² N·m × 5000·2π/60 rad/s = 130.8997 W over 10 s.
  EXPECT_NEAR(motor_power(5000.0, 1e-8), 130.8997, 1e-4);
  EXPECT_NEAR(m.energy, 0.36361, 1e-5);
  EXPECT_EQ(m.rmse, 0.0);
}

TEST(Metrics, RmseOfConstantOffset) {
  SimLog log;
  for (int i = 0; i < 10; ++i) {
    LogRow r;
    r.time = i * log.dt;
    r.state.position = Vec3(i, 0, 0);
    r.ref.position = Vec3(i, 0.3, -0.4);
    log.rows.push_back(r);
  }
  EXPECT_NEAR(compute_metrics(log, 1e-8, 1e-8).rmse, 0.5, 1e-12);
}

// ---- closed loop ----

TEST(RunScenario, OpenLandRunReachesGoalAccurately) {
  const auto& r = land_result();
  EXPECT_TRUE(r.metrics.success);
  EXPECT_LT(r.metrics.rmse, 0.05);
  EXPECT_GT(r.metrics.energy, 0.0);
  EXPECT_LT((r.log.rows.back().state.position - Vec3(5, 0, 0)).norm(), 0.3);
  ASSERT_FALSE(r.log.events.empty());
  EXPECT_EQ(r.log.events.back().kind, EventKind::GoalReached);
}

TEST(RunScenario, HoldingPositionTimesOut) {
  auto c = open_land_run();
  c.sim.hold_position = true;
  c.sim.timeout = 3.0;
  const auto r = run_scenario(c);
  EXPECT_FALSE(r.metrics.success);
  ASSERT_FALSE(r.log.events.empty());
  EXPECT_EQ(r.log.events.back().kind, EventKind::Timeout);
  EXPECT_LT(r.log.rows.back().state.position.norm(), 1e-3);  // measurement noise only
}

TEST(RunScenario, LandModeNeverLeavesTheGround) {
  for (const auto* r : {&land_result(), &air_result()}) {
    for (const auto& row : r->log.rows) {
      if (row.mode == Mode::Land) EXPECT_EQ(row.state.position.z(), 0.0);
    }
  }
}

TEST(RunScenario, LogIsUniformlySampled) {
  const auto& log = land_result().log;
  ASSERT_GT(log.rows.size(), 10u);
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    EXPECT_NEAR(log.rows[i].time - log.rows[i - 1].time, log.dt, 1e-9);
  }
}

TEST(RunScenario, EnergyGrowsWheneverAMotorSpins) {
  const auto& r = air_result();
  const VehicleParams p;
  double cumulative = 0.0;
  for (const auto& row : r.log.rows) {
    const double k = row.mode == Mode::Air ? p.k_torque_air : p.k_torque_land;
    double power = 0.0;
    bool spinning = false;
    for (double rpm : row.rpm) {
      power += motor_power(rpm, k);
      spinning = spinning || rpm > 0.0;
    }
    EXPECT_GE(power, 0.0);
    if (spinning) EXPECT_GT(power, 0.0);
    cumulative += power * r.log.dt;
  }
  EXPECT_NEAR(cumulative / 3600.0, r.metrics.energy, 1e-12);
}

TEST(RunScenario, ObserverConvergesUnderConstantWind) {
  const auto& rows = air_result().log.rows;
  ASSERT_GT(rows.size(), 50u);
  double err = 0.0, err_x = 0.0;
  std::size_t n = 0;
  for (std::size_t i = rows.size() / 2; i < rows.size(); ++i, ++n) {
    err += (rows[i].d_hat - rows[i].d_true).norm();
    err_x += std::abs(rows[i].d_hat.x() - rows[i].d_true.x());
  }
  const Vec3 truth = rows.back().d_true;
  EXPECT_LT(err / n, 0.05 * truth.norm() + 0.02);
  EXPECT_LT(err_x / n, 0.05 * std::abs(truth.x()) + 0.02);
}

TEST(RunScenario, SaturationFlagMarksAccelerationGaps) {
  const auto& rows = air_result().log.rows;
  double gap_sat = 0.0, gap_free = 0.0;
  int n_sat = 0, n_free = 0;
  for (const auto& r : rows) {
    const double g = (r.accel_cmd - r.accel_meas).norm();
    if (r.saturated) {
      gap_sat += g;
      ++n_sat;
    } else {
      gap_free += g;
      ++n_free;
    }
  }
  ASSERT_GT(n_sat, 0);
  ASSERT_GT(n_free, 0);
  EXPECT_GT(gap_sat / n_sat, 2.0 * gap_free / n_free);
}

TEST(RunScenario, BitIdenticalRepeats) {
  const auto again = run_scenario(windy_air_run());
  const auto& first = air_result();
  std::ostringstream a, b;
  write_log_csv(first.log, a);
  write_log_csv(again.log, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(first.metrics.energy, again.metrics.energy);
  EXPECT_EQ(first.metrics.rmse, again.metrics.rmse);
}

TEST(RunScenario, InvalidConfigIsRejected) {
  auto c = open_land_run();
  c.goal = Vec3(100, 0, 0);
  EXPECT_THROW(run_scenario(c), std::invalid_argument);
}

// ---- exports ----

TEST(Export, LogCsvHasHeaderAndOneLinePerRow) {
  const auto& log = land_result().log;
  std::ostringstream out;
  write_log_csv(log, out);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_NE(header.find("time"), std::string::npos);
  EXPECT_NE(header.find("mode"), std::string::npos);
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, log.rows.size());
}

TEST(Export, MetricsJsonFields) {
  const auto text = metrics_json(land_result().metrics);
  for (const char* key : {"time_s", "energy_wh", "rmse_m", "success"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}
