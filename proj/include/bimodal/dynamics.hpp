#pragma once

#include "bimodal/core.hpp"

#include <array>
#include <stdexcept>
#include <variant>

namespace bimodal {

struct FlightInput {
  double thrust = 0.0;          // F1, total (N)
  Vec3 torque = Vec3::Zero();   // τ (N·m)
};

/// Pairwise wheel forces: F_{2,1} = F_{2,4} (left side), F_{2,2} = F_{2,3}
/// (right side). Each entry is a per-wheel force.
struct LandInput {
  double left = 0.0;
  double right = 0.0;
};

/// Per-wheel resistive forces. Positive values oppose forward (R_x) or
/// leftward (R_y) motion in the body frame. Wheels: 1 front-left, 2
/// front-right, 3 rear-right, 4 rear-left.
struct GroundResistance {
  std::array<double, 4> longitudinal{};
  std::array<double, 4> lateral{};
  // Yaw moment not captured by the per-wheel forces (turning scrub), N·m.
  double extra_moment = 0.0;

  double total_longitudinal() const;
  double total_lateral() const;
  /// d_land = [R_x, R_y, 0]
  Vec3 as_vector() const { return {total_longitudinal(), total_lateral(), 0.0}; }
};

/// External disturbances held constant over one integration step.
struct Disturbances {
  Vec3 d_air = Vec3::Zero();         // N, enters flight dynamics as -d_air
  Vec3 torque = Vec3::Zero();        // n (N·m)
  GroundResistance ground;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrust axis R3(Θ): third column of the body-to-world rotation.
Vec3 thrust_axis(const Vec3& attitude);

/// m·r̈ = F1·R3(Θ) − d_air − m·g
Vec3 flight_accel(const VehicleState& state, const FlightInput& in, const Vec3& d_air,
                  const VehicleParams& p);

/// Gyroscopic coupling c(Θ̇).
Vec3 gyroscopic_term(const Vec3& angular_velocity, const Vec3& inertia);

/// J·Θ̈ = τ − c(Θ̇) − n
Vec3 flight_angular_accel(const VehicleState& state, const FlightInput& in,
                          const Vec3& external_torque, const VehicleParams& p);

/// C(ψ)·F: total planar drive force in the world frame (z = 0).
Vec3 drive_force(const LandInput& in, double yaw);

/// H(ψ)·v: rotates a body-frame vector into the world frame about z.
Vec3 rotate_yaw(const Vec3& body, double yaw);

/// Sideways tyre force keeping the wheels from sliding:
/// −μ_grip·m·g·tanh(v_lat/0.05) along the body y axis. Part of the known
/// vehicle model, not of the disturbance.
Vec3 tire_grip_force(const Vec3& velocity, double yaw, const VehicleParams& p);

/// M·r̈ = C(ψ)·F − H(ψ)·d_land + grip; the third component is identically zero.
Vec3 land_accel(const VehicleState& state, const LandInput& in, const Vec3& d_land,
                const VehicleParams& p);

/// Resistive moment M_r from per-wheel ground forces (plus `extra_moment`).
double resistive_moment(const GroundResistance& res, const VehicleParams& p);

/// J_z·ψ̈ = (−F_{2,1} + F_{2,2})·w − M_r
double land_yaw_accel(const LandInput& in, double resistive_moment, const VehicleParams& p);

using ControlInput = std::variant<FlightInput, LandInput>;

/// Classical RK4 step of the active mode's dynamics. Disturbances are held
/// over the step. Land mode pins z, roll and pitch (and their rates) to zero.
/// Throws IntegrationError when the result is not finite, and InvalidArgument
/// when the input type does not match the mode.
VehicleState step(const VehicleState& state, const ControlInput& input,
                  const Disturbances& dist, double dt, const VehicleParams& p);

/// Mechanical motor power P = τ·ω with τ = k·rpm², ω = 2π/60·rpm.
double motor_power(double rpm, double k_torque);

/// rpm that produces `torque` under τ = k·rpm² (zero for non-positive torque).
double rpm_from_torque(double torque, double k_torque);

/// Per-motor speeds for the active mode. Air: thrust split equally over four
/// rotors, rpm = sqrt((F1/4)/k_thrust). Land: each wheel's |force|·radius is
/// inverted through k_torque_land.
std::array<double, 4> motor_rpms(const ControlInput& input, const VehicleParams& p);

}  // namespace bimodal
