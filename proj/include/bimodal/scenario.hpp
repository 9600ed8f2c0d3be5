#pragma once

#include "bimodal/core.hpp"
#include "bimodal/planner.hpp"
#include "bimodal/switch.hpp"

#include <string>
#include <vector>

namespace bimodal {

/// Axis-aligned box wind field. `force` is d_air (the vehicle feels −force);
/// the gust adds amplitude·sin(2π·frequency·t) along the force direction.
struct WindZone {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  double gust_amplitude = 0.0;  // N
  double gust_frequency = 0.0;  // Hz

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 force_at(double t) const;
  void validate() const;
};

/// Ground patch with Coulomb-like friction (smoothed with tanh) and a viscous
/// term. `moment_arm` (k_M) scales a yaw scrub moment k_M·μ·(m g/4)·tanh(ψ̇/0.05)
/// per wheel inside the patch.
struct ResistanceZone {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  double friction = 0.0;          // μ
  double lateral_friction = 0.0;  // μ_lat
  double moment_arm = 0.0;        // k_M (m)
  double viscous = 0.0;           // 1/s, longitudinal force per unit mass and speed

  bool contains(const Vec2& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  void validate() const;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct MapSpec {
  Vec3 origin = Vec3::Zero();
  double resolution = 0.1;
  Index3 dims{100, 100, 30};
  std::vector<Box> obstacles;
  double truncation = 2.0;

  OccupancyGrid build_grid() const;
  Vec3 upper_corner() const { return origin + dims.cast<double>() * resolution; }
};

struct TrackingGains {
  double air_kp = 4.0;
  double air_kd = 3.0;
  double land_kp = 6.0;
  double land_kd = 4.0;
  double heading_kp = 8.0;
  double heading_kd = 1.0;
  // Inner attitude loop (per unit inertia), runs at the dynamics rate.
  double attitude_kp = 400.0;
  double attitude_kd = 40.0;
  double max_heading_offset = 1.0472;  // rad, cap on thrust-direction steering
  bool land_disturbance_compensation = true;

  void validate() const;
};

struct ObserverConfig {
  double time_constant = 0.1;
  double velocity_noise = 0.002;  // m/s, std-dev of the measured velocity
};

struct SimConfig {
  double dt_dynamics = 0.002;
  double dt_control = 0.01;
  double replan_hz = 10.0;
  double timeout = 60.0;
  double goal_tolerance = 0.3;
  std::uint64_t seed = 1;
  bool hold_position = false;          // never plan; the reference stays at the start
  double replan_error_threshold = 1.0; // replan from the measured state beyond this
  double replan_period = 1.0;          // s, a plan older than this is replaced
  double bounds_change_threshold = 0.5; // m/s², bound shift that forces a replan
  int max_consecutive_failures = 10;

  void validate() const;
};

enum class PlannerVariant { Adaptive, FixedBounds };

std::string_view to_string(PlannerVariant v);
PlannerVariant variant_from_string(std::string_view text);

struct StartState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double yaw = 0.0;
  Mode mode = Mode::Land;
};

struct ScenarioConfig {
  std::string name = "scenario";
  MapSpec map;
  std::vector<WindZone> wind_zones;
  std::vector<ResistanceZone> resistance_zones;
  StartState start;
  Vec3 goal = Vec3::Zero();
  VehicleParams vehicle;
  PlannerConfig planner;
  SwitchConfig switching;
  ObserverConfig observer;
  TrackingGains tracking;
  SimConfig sim;
  PlannerVariant variant = PlannerVariant::Adaptive;
  // Benchmark expectations: metrics ("time_s", "energy_wh", "rmse_m") on which
  // the adaptive variant must beat the fixed-bounds baseline.
  std::vector<std::string> expect_lower;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

}  // namespace bimodal
