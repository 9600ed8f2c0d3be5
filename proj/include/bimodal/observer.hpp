#pragma once

#include "bimodal/core.hpp"
#include "bimodal/dynamics.hpp"

namespace bimodal {

/// Nominal model input for the air mode, u1 = F1·R3(Θ)/m.
Vec3 nominal_input_air(double thrust, const Vec3& attitude, const VehicleParams& p);

/// Nominal model input for the land mode, u2 = M⁻¹·C(ψ)·F, plus the tyre
/// grip at `velocity` (known model, so it stays out of the estimate).
Vec3 nominal_input_land(const LandInput& in, double yaw, const VehicleParams& p,
                        const Vec3& velocity = Vec3::Zero());

struct DisturbanceEstimate {
  Vec3 value = Vec3::Zero();  // d̂1 (air) or d̂2 (land), m/s²
  Mode mode = Mode::Land;
  double timestamp = 0.0;
  double age = 0.0;           // time since the last reset
  bool error = false;         // last update rejected a non-finite input
};

/// Uncertainty and disturbance estimator with a first-order low-pass G(s) = 1/(Ts+1).
///
/// The estimate follows T·d̂' + d̂ = r̈ − u0 with r̈ taken from velocity
/// differencing. The discrete update is the exact zero-order-hold solution
///
///   d̂⁺ = d̂·e^{−dt/T} + (1 − e^{−dt/T})·(Δv/dt − u0)
///
/// so it is stable for any dt. In the land mode the vertical component is
/// forced to zero.
class UdeEstimator {
 public:
  explicit UdeEstimator(double time_constant = 0.1, Mode mode = Mode::Land);

  double time_constant() const { return time_constant_; }
  Mode mode() const { return mode_; }
  const Vec3& estimate() const { return d_hat_; }
  bool primed() const { return primed_; }

  /// Clears the filter for `mode`. `initial` seeds d̂ (e.g. the gravity-only
  /// prior (0, 0, −g) for the air mode).
  void reset(Mode mode, const Vec3& initial = Vec3::Zero(), double time = 0.0);

  /// Records the first velocity sample without producing an update.
  void prime(const Vec3& velocity, double time);

  /// `u0` is the model input applied over the last interval (mean of
  /// nominal_input_* over that interval).
  DisturbanceEstimate update(const Vec3& velocity, const Vec3& u0, double dt);

  DisturbanceEstimate snapshot() const;
  const Vec3& u0_integral() const { return u0_integral_; }

 private:
  double time_constant_;
  Mode mode_;
  Vec3 d_hat_ = Vec3::Zero();
  Vec3 v_prev_ = Vec3::Zero();
  // Running integral of u0 since the last reset (diagnostics).
  Vec3 u0_integral_ = Vec3::Zero();
  bool primed_ = false;
  bool error_ = false;
  double time_ = 0.0;
  double reset_time_ = 0.0;
};

}  // namespace bimodal
