#pragma once

#include "bimodal/core.hpp"

namespace bimodal {

/// Per-axis feasible acceleration intervals [min, max] (m/s²) for one mode.
struct AccelBounds {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Mode mode = Mode::Land;

  bool contains(const Vec3& a, double tol = 0.0) const {
    return ((a - min).array() >= -tol).all() && ((max - a).array() >= -tol).all();
  }
  Vec3 width() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  AccelBounds shifted(const Vec3& delta) const { return {min + delta, max + delta, mode}; }
};

/// Flight-mode bounds from the gravity-inclusive estimate d̂1:
/// x, y: [−F1max/m + d̂, F1max/m + d̂]; z: [d̂z, F1max_z/m + d̂z].
AccelBounds air_bounds(const Vec3& d1_hat, const VehicleParams& p);

/// Land-mode bounds from d̂2: x, y: [−F2max/m + d̂, F2max/m + d̂]; z: [0, 0].
AccelBounds land_bounds(const Vec3& d2_hat, const VehicleParams& p);

/// The pair of bounds handed to the planner for one cycle.
struct BoundsPair {
  AccelBounds air;
  AccelBounds land;

  const AccelBounds& for_altitude(double z, double r_thr) const {
    return z > r_thr ? air : land;
  }
};

/// Bounds with a zero land estimate and a gravity-only air estimate, i.e. the
/// values a planner without disturbance information would use.
BoundsPair nominal_bounds(const VehicleParams& p);

}  // namespace bimodal
