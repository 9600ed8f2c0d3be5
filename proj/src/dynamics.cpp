#include "bimodal/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace bimodal {

double GroundResistance::total_longitudinal() const {
  return longitudinal[0] + longitudinal[1] + longitudinal[2] + longitudinal[3];
}

double GroundResistance::total_lateral() const {
  return lateral[0] + lateral[1] + lateral[2] + lateral[3];
}

Vec3 thrust_axis(const Vec3& attitude) {
  const double cphi = std::cos(attitude.x()), sphi = std::sin(attitude.x());
  const double cth = std::cos(attitude.y()), sth = std::sin(attitude.y());
  const double cpsi = std::cos(attitude.z()), spsi = std::sin(attitude.z());
  return {cphi * sth * cpsi + sphi * spsi, cphi * sth * spsi - sphi * cpsi, cth * cphi};
}

Vec3 flight_accel(const VehicleState& state, const FlightInput& in, const Vec3& d_air,
                  const VehicleParams& p) {
  return (in.thrust * thrust_axis(state.attitude) - d_air) / p.mass - gravity_vector(p.gravity);
}

Vec3 gyroscopic_term(const Vec3& w, const Vec3& J) {
  // w = (φ̇, θ̇, ψ̇)
  return {(J.y() - J.z()) * w.z() * w.y(), (J.z() - J.x()) * w.x() * w.z(),
          (J.x() - J.y()) * w.x() * w.y()};
}

Vec3 flight_angular_accel(const VehicleState& state, const FlightInput& in,
                          const Vec3& external_torque, const VehicleParams& p) {
  const Vec3 rhs = in.torque - gyroscopic_term(state.angular_velocity, p.inertia) - external_torque;
  return rhs.cwiseQuotient(p.inertia);
}

Vec3 drive_force(const LandInput& in, double yaw) {
  const double total = 2.0 * in.left + 2.0 * in.right;
  return {total * std::cos(yaw), total * std::sin(yaw), 0.0};
}

Vec3 rotate_yaw(const Vec3& body, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * body.x() - s * body.y(), s * body.x() + c * body.y(), body.z()};
}

Vec3 tire_grip_force(const Vec3& velocity, double yaw, const VehicleParams& p) {
  const Vec3 lateral(-std::sin(yaw), std::cos(yaw), 0.0);
  const double v_lat = velocity.dot(lateral);
  return -p.ground_grip * p.mass * p.gravity * std::tanh(v_lat / 0.05) * lateral;
}

Vec3 land_accel(const VehicleState& state, const LandInput& in, const Vec3& d_land,
                const VehicleParams& p) {
  const Vec3 f = drive_force(in, state.yaw()) - rotate_yaw(d_land, state.yaw()) +
                 tire_grip_force(state.velocity, state.yaw(), p);
  // M = diag(m, m, 1); the third row of C and H·d_land is zero for d_land.z = 0
  return {f.x() / p.mass, f.y() / p.mass, 0.0};
}

double resistive_moment(const GroundResistance& r, const VehicleParams& p) {
  const auto& rx = r.longitudinal;
  const auto& ry = r.lateral;
  return ((rx[1] + rx[2]) - (rx[0] + rx[3])) * p.wheel_track / 2.0 +
         (ry[0] + ry[1]) * p.front_offset - (ry[2] + ry[3]) * p.rear_offset + r.extra_moment;
}

double land_yaw_accel(const LandInput& in, double moment, const VehicleParams& p) {
  return ((-in.left + in.right) * p.wheel_track - moment) / p.inertia.z();
}

namespace {

struct AirDeriv {
  Vec3 dpos, dvel, datt, domega;
};

struct LandDeriv {
  Vec3 dpos, dvel;
  double dyaw, dyawrate;
};

VehicleState step_air(const VehicleState& s0, const FlightInput& in, const Disturbances& dist,
                      double dt, const VehicleParams& p) {
  auto deriv = [&](const VehicleState& s) {
    return AirDeriv{s.velocity, flight_accel(s, in, dist.d_air, p), s.angular_velocity,
                    flight_angular_accel(s, in, dist.torque, p)};
  };
  auto advance = [&](const AirDeriv& k, double h) {
    VehicleState s = s0;
    s.position += h * k.dpos;
    s.velocity += h * k.dvel;
    s.attitude += h * k.datt;
    s.angular_velocity += h * k.domega;
    return s;
  };
  const AirDeriv k1 = deriv(s0);
  const AirDeriv k2 = deriv(advance(k1, dt / 2));
  const AirDeriv k3 = deriv(advance(k2, dt / 2));
  const AirDeriv k4 = deriv(advance(k3, dt));
  VehicleState s = s0;
  s.position += dt / 6.0 * (k1.dpos + 2 * k2.dpos + 2 * k3.dpos + k4.dpos);
  s.velocity += dt / 6.0 * (k1.dvel + 2 * k2.dvel + 2 * k3.dvel + k4.dvel);
  s.attitude += dt / 6.0 * (k1.datt + 2 * k2.datt + 2 * k3.datt + k4.datt);
  s.angular_velocity += dt / 6.0 * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega);
  return s;
}

VehicleState step_land(const VehicleState& s0, const LandInput& in, const Disturbances& dist,
                       double dt, const VehicleParams& p) {
  const Vec3 d_land = dist.ground.as_vector();
  const double moment = resistive_moment(dist.ground, p);
  const double yaw_acc = land_yaw_accel(in, moment, p);
  auto deriv = [&](const VehicleState& s) {
    return LandDeriv{s.velocity, land_accel(s, in, d_land, p), s.angular_velocity.z(), yaw_acc};
  };
  auto advance = [&](const LandDeriv& k, double h) {
    VehicleState s = s0;
    s.position += h * k.dpos;
    s.velocity += h * k.dvel;
    s.attitude.z() += h * k.dyaw;
    s.angular_velocity.z() += h * k.dyawrate;
    return s;
  };
  const LandDeriv k1 = deriv(s0);
  const LandDeriv k2 = deriv(advance(k1, dt / 2));
  const LandDeriv k3 = deriv(advance(k2, dt / 2));
  const LandDeriv k4 = deriv(advance(k3, dt));
  VehicleState s = s0;
  s.position += dt / 6.0 * (k1.dpos + 2 * k2.dpos + 2 * k3.dpos + k4.dpos);
  s.velocity += dt / 6.0 * (k1.dvel + 2 * k2.dvel + 2 * k3.dvel + k4.dvel);
  s.attitude.z() += dt / 6.0 * (k1.dyaw + 2 * k2.dyaw + 2 * k3.dyaw + k4.dyaw);
  s.angular_velocity.z() +=
      dt / 6.0 * (k1.dyawrate + 2 * k2.dyawrate + 2 * k3.dyawrate + k4.dyawrate);
  s.position.z() = 0.0;
  s.velocity.z() = 0.0;
  s.attitude.x() = 0.0;
  s.attitude.y() = 0.0;
  s.angular_velocity.x() = 0.0;
  s.angular_velocity.y() = 0.0;
  return s;
}

bool finite(const VehicleState& s) {
  return s.position.allFinite() && s.velocity.allFinite() && s.attitude.allFinite() &&
         s.angular_velocity.allFinite();
}

}  // namespace

VehicleState step(const VehicleState& state, const ControlInput& input, const Disturbances& dist,
                  double dt, const VehicleParams& p) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  VehicleState next;
  if (state.mode == Mode::Air) {
    const auto* in = std::get_if<FlightInput>(&input);
    if (!in) throw InvalidArgument("step: air mode requires a FlightInput");
    next = step_air(state, *in, dist, dt, p);
  } else {
    const auto* in = std::get_if<LandInput>(&input);
    if (!in) throw InvalidArgument("step: land mode requires a LandInput");
    next = step_land(state, *in, dist, dt, p);
  }
  next.time = state.time + dt;
  if (!finite(next)) throw IntegrationError("step: non-finite state after integration");
  return next;
}

double motor_power(double rpm, double k_torque) {
  const double torque = k_torque * rpm * rpm;
  const double omega = 2.0 * std::numbers::pi / 60.0 * rpm;
  return torque * omega;
}

double rpm_from_torque(double torque, double k_torque) {
  return torque > 0.0 ? std::sqrt(torque / k_torque) : 0.0;
}

std::array<double, 4> motor_rpms(const ControlInput& input, const VehicleParams& p) {
  if (const auto* air = std::get_if<FlightInput>(&input)) {
    const double per_rotor = std::max(air->thrust, 0.0) / 4.0;
    const double rpm = std::sqrt(per_rotor / p.k_thrust_air);
    return {rpm, rpm, rpm, rpm};
  }
  const auto& land = std::get<LandInput>(input);
  const double left = rpm_from_torque(std::abs(land.left) * p.wheel_radius, p.k_torque_land);
  const double right = rpm_from_torque(std::abs(land.right) * p.wheel_radius, p.k_torque_land);
  // wheel order 1 FL, 2 FR, 3 RR, 4 RL
  return {left, right, right, left};
}

}  // namespace bimodal
