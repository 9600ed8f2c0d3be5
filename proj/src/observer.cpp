#include "bimodal/observer.hpp"

#include <cmath>

namespace bimodal {

Vec3 nominal_input_air(double thrust, const Vec3& attitude, const VehicleParams& p) {
  return thrust * thrust_axis(attitude) / p.mass;
}

Vec3 nominal_input_land(const LandInput& in, double yaw, const VehicleParams& p,
                        const Vec3& velocity) {
  const Vec3 f = drive_force(in, yaw) + tire_grip_force(velocity, yaw, p);
  return {f.x() / p.mass, f.y() / p.mass, 0.0};
}

UdeEstimator::UdeEstimator(double time_constant, Mode mode)
    : time_constant_(time_constant), mode_(mode) {
  if (!(time_constant > 0.0)) throw InvalidArgument("observer time constant must be positive");
}

void UdeEstimator::reset(Mode mode, const Vec3& initial, double time) {
  mode_ = mode;
  d_hat_ = initial;
  if (mode_ == Mode::Land) d_hat_.z() = 0.0;
  v_prev_.setZero();
  u0_integral_.setZero();
  primed_ = false;
  error_ = false;
  time_ = time;
  reset_time_ = time;
}

void UdeEstimator::prime(const Vec3& velocity, double time) {
  v_prev_ = velocity;
  time_ = time;
  primed_ = true;
}

DisturbanceEstimate UdeEstimator::update(const Vec3& velocity, const Vec3& u0, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("observer update: dt must be positive");
  if (!velocity.allFinite() || !u0.allFinite()) {
    d_hat_.setZero();
    u0_integral_.setZero();
    primed_ = false;
    error_ = true;
    time_ += dt;
    return snapshot();
  }
  error_ = false;
  time_ += dt;
  if (!primed_) {
    v_prev_ = velocity;
    primed_ = true;
    return snapshot();
  }
  const Vec3 accel = (velocity - v_prev_) / dt;
  const double decay = std::exp(-dt / time_constant_);
  d_hat_ = decay * d_hat_ + (1.0 - decay) * (accel - u0);
  if (mode_ == Mode::Land) d_hat_.z() = 0.0;
  u0_integral_ += u0 * dt;
  v_prev_ = velocity;
  return snapshot();
}

DisturbanceEstimate UdeEstimator::snapshot() const {
  DisturbanceEstimate out;
  out.value = d_hat_;
  out.mode = mode_;
  out.timestamp = time_;
  out.age = time_ - reset_time_;
  out.error = error_;
  return out;
}

}  // namespace bimodal
