#include "bimodal/scenario.hpp"

#include <cmath>
#include <numbers>

namespace bimodal {

Vec3 WindZone::force_at(double t) const {
  if (gust_amplitude == 0.0) return force;
  const Vec3 dir = force.norm() > 0.0 ? Vec3(force.normalized()) : Vec3::UnitX();
  return force + gust_amplitude * std::sin(2.0 * std::numbers::pi * gust_frequency * t) * dir;
}

void WindZone::validate() const {
  if (!((max.array() > min.array()).all())) throw InvalidArgument("wind_zones: box is degenerate");
  if (!force.allFinite()) throw InvalidArgument("wind_zones.force must be finite");
  if (gust_frequency < 0.0) throw InvalidArgument("wind_zones.gust_frequency must be non-negative");
}

void ResistanceZone::validate() const {
  if (!((max.array() > min.array()).all())) {
    throw InvalidArgument("resistance_zones: rectangle is degenerate");
  }
  if (friction < 0.0) throw InvalidArgument("resistance_zones.friction must be non-negative");
  if (lateral_friction < 0.0) {
    throw InvalidArgument("resistance_zones.lateral_friction must be non-negative");
  }
  if (viscous < 0.0) throw InvalidArgument("resistance_zones.viscous must be non-negative");
  if (moment_arm < 0.0) throw InvalidArgument("resistance_zones.moment_arm must be non-negative");
}

OccupancyGrid MapSpec::build_grid() const {
  OccupancyGrid grid(origin, resolution, dims);
  for (const Box& b : obstacles) grid.fill_box(b.min, b.max);
  return grid;
}

void TrackingGains::validate() const {
  for (double g : {air_kp, air_kd, land_kp, land_kd, heading_kp, heading_kd, attitude_kp,
                   attitude_kd}) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("tracking gains must be non-negative");
  }
  if (!(max_heading_offset >= 0.0)) {
    throw InvalidArgument("tracking.max_heading_offset must be non-negative");
  }
}

void SimConfig::validate() const {
  if (!(dt_dynamics > 0.0)) throw InvalidArgument("sim.dt_dynamics must be positive");
  if (!(dt_control > 0.0)) throw InvalidArgument("sim.dt_control must be positive");
  const double ratio = dt_control / dt_dynamics;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw InvalidArgument("sim.dt_control must be a multiple of sim.dt_dynamics");
  }
  if (!(replan_hz > 0.0)) throw InvalidArgument("sim.replan_hz must be positive");
  const double per = 1.0 / (replan_hz * dt_control);
  if (std::abs(per - std::round(per)) > 1e-6 || per < 1.0) {
    throw InvalidArgument("sim.replan_hz must divide the control rate");
  }
  if (!(timeout > 0.0)) throw InvalidArgument("sim.timeout must be positive");
  if (!(goal_tolerance > 0.0)) throw InvalidArgument("sim.goal_tolerance must be positive");
  if (!(replan_error_threshold > 0.0)) {
    throw InvalidArgument("sim.replan_error_threshold must be positive");
  }
  if (!(replan_period > 0.0)) throw InvalidArgument("sim.replan_period must be positive");
  if (!(bounds_change_threshold > 0.0)) {
    throw InvalidArgument("sim.bounds_change_threshold must be positive");
  }
  if (max_consecutive_failures < 1) {
    throw InvalidArgument("sim.max_consecutive_failures must be >= 1");
  }
}

std::string_view to_string(PlannerVariant v) {
  return v == PlannerVariant::Adaptive ? "adaptive" : "fixed_bounds";
}

PlannerVariant variant_from_string(std::string_view text) {
  if (text == "adaptive") return PlannerVariant::Adaptive;
  if (text == "fixed_bounds" || text == "fixed") return PlannerVariant::FixedBounds;
  throw InvalidArgument("planner_variant: unknown variant '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  if (!(map.resolution > 0.0)) throw InvalidArgument("map.resolution must be positive");
  if ((map.dims.array() <= 0).any()) throw InvalidArgument("map.dims must be positive");
  if (!(map.truncation > 0.0)) throw InvalidArgument("map.truncation must be positive");
  for (const Box& b : map.obstacles) {
    if (!((b.max.array() >= b.min.array()).all())) {
      throw InvalidArgument("map.obstacles: min must not exceed max");
    }
  }
  const Vec3 lo = map.origin, hi = map.upper_corner();
  auto inside = [&](const Vec3& p) {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  };
  Vec3 start_p = start.position;
  if (start.mode == Mode::Land) start_p.z() = std::max(start_p.z(), lo.z());
  if (!start.position.allFinite() || !inside(start_p)) {
    throw InvalidArgument("start: position is outside the map");
  }
  if (!goal.allFinite() || !inside(goal)) throw InvalidArgument("goal: position is outside the map");
  for (const auto& w : wind_zones) w.validate();
  for (const auto& r : resistance_zones) r.validate();
  vehicle.validate();
  planner.validate();
  switching.validate();
  if (std::abs(switching.altitude_threshold - planner.search.altitude_threshold) > 1e-12) {
    throw InvalidArgument("switch.altitude_threshold must equal search.altitude_threshold");
  }
  if (!(observer.time_constant > 0.0)) {
    throw InvalidArgument("observer.time_constant must be positive");
  }
  if (!(observer.velocity_noise >= 0.0)) {
    throw InvalidArgument("observer.velocity_noise must be non-negative");
  }
  tracking.validate();
  sim.validate();
  for (const auto& m : expect_lower) {
    if (m != "time_s" && m != "energy_wh" && m != "rmse_m") {
      throw InvalidArgument("expect_lower: unknown metric '" + m + "'");
    }
  }
}

}  // namespace bimodal
