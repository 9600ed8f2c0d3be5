#pragma once

#include "bimodal/dynamics.hpp"
#include "bimodal/scenario.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bimodal {

struct DisturbanceFields {
  std::vector<WindZone> wind;
  std::vector<ResistanceZone> resistance;
};

struct SampledDisturbance {
  Vec3 d_air = Vec3::Zero();  // N
  GroundResistance ground;
};

/// Body-frame wheel positions (x forward, y left): FL, FR, RR, RL.
std::array<Vec2, 4> wheel_offsets(const VehicleParams& p);

/// Wind sums the containing zones. Each wheel inside a resistance zone gets
/// R_x = μ·(m g/4)·tanh(v_x/0.05) + viscous·(m/4)·v_x and
/// R_y = μ_lat·(m g/4)·tanh(v_y/0.05) from its own body-frame velocity.
SampledDisturbance sample_disturbance(const DisturbanceFields& fields, const VehicleState& state,
                                      const VehicleParams& p);

/// The disturbance as the observer sees it: d1 = −g − d_air/m (air) or
/// d2 = −H(ψ)·d_land/m (land).
Vec3 true_disturbance_accel(const SampledDisturbance& d, const VehicleState& state,
                            const VehicleParams& p);

struct Reference {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

struct AirCommand {
  FlightInput input;
  Vec3 attitude = Vec3::Zero();   // desired (roll, pitch, yaw)
  Vec3 accel = Vec3::Zero();      // desired acceleration before saturation
  bool saturated = false;
};

/// Position PD with feed-forward, inverted through the thrust model. With
/// `d1_hat` the estimate replaces the nominal −g term.
AirCommand track_air(const Reference& ref, const VehicleState& state,
                     const std::optional<Vec3>& d1_hat, const TrackingGains& gains,
                     const VehicleParams& p, double yaw_target = 0.0);

/// Inner attitude PD (plus gyroscopic feed-forward) toward `attitude_des`.
Vec3 attitude_torque(const VehicleState& state, const Vec3& attitude_des,
                     const TrackingGains& gains, const VehicleParams& p);

struct LandCommand {
  LandInput input;
  double heading = 0.0;         // heading target
  Vec3 accel = Vec3::Zero();    // desired planar acceleration
  bool saturated = false;
};

/// Thrust-direction steering for the wheeled mode: the longitudinal force is
/// the desired force projected on the heading, the heading PD sets the
/// left/right difference.
LandCommand track_land(const Reference& ref, const VehicleState& state,
                       const std::optional<Vec3>& d2_hat, const TrackingGains& gains,
                       const VehicleParams& p);

double wrap_angle(double a);

struct LogRow {
  double time = 0.0;
  Mode mode = Mode::Land;
  VehicleState state;
  Reference ref;
  Vec3 accel_cmd = Vec3::Zero();
  Vec3 accel_meas = Vec3::Zero();
  Vec3 d_hat = Vec3::Zero();
  Vec3 d_true = Vec3::Zero();
  AccelBounds bounds;
  double thrust = 0.0;
  double wheel_left = 0.0;
  double wheel_right = 0.0;
  std::array<double, 4> rpm{};
  bool saturated = false;
};

enum class EventKind {
  Replan,
  ReplanFailed,
  DetourReplanned,
  SwitchedToAir,
  SwitchedToLand,
  DecisionError,
  EmergencyStop,
  GoalReached,
  Timeout,
};

std::string_view to_string(EventKind k);

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::Replan;
  double magnitude = 0.0;
  bool detour_attempted = false;
  bool detour_found = false;
  std::vector<Vec3> horizon;  // for switches: the checked horizon
  std::string detail;
};

struct SimLog {
  double dt = 0.01;
  std::vector<LogRow> rows;
  std::vector<SimEvent> events;
  double cycle_ms_median = 0.0;  // search + optimize wall time per replan
  std::vector<double> cycle_ms;

  bool empty() const { return rows.empty(); }
};

struct Metrics {
  double task_time = 0.0;  // s
  double energy = 0.0;     // Wh
  double rmse = 0.0;       // m
  bool success = false;
  bool empty = false;
};

/// Rectangle-rule energy over the logged motor speeds (k_torque by mode),
/// RMSE of ‖p − p_ref‖ over all rows, time from the first to the last row.
Metrics compute_metrics(const SimLog& log, double k_torque_air, double k_torque_land);

struct SimResult {
  SimLog log;
  Metrics metrics;
};

SimResult run_scenario(const ScenarioConfig& cfg);

/// CSV with a header row; numbers use shortest round-trip formatting.
void write_log_csv(const SimLog& log, std::ostream& out);
void write_events_csv(const SimLog& log, std::ostream& out);
std::string metrics_json(const Metrics& m);

}  // namespace bimodal
