#pragma once

#include "bimodal/core.hpp"
#include "bimodal/search.hpp"

#include <vector>

namespace bimodal {

/// Uniform B-spline of degree p over control points Q_0..Q_N with knot
/// interval dt. The valid parameter range is [0, (N + 1 − p)·dt].
class UniformBSpline {
 public:
  struct Sample {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 acceleration = Vec3::Zero();
    bool clamped = false;  // t was outside the valid range
  };

  UniformBSpline() = default;
  UniformBSpline(std::vector<Vec3> control_points, double knot_interval, int degree = 3);

  int degree() const { return degree_; }
  double knot_interval() const { return dt_; }
  std::size_t size() const { return ctrl_.size(); }
  const std::vector<Vec3>& control_points() const { return ctrl_; }
  std::vector<Vec3>& control_points() { return ctrl_; }

  double duration() const { return (static_cast<double>(ctrl_.size()) - degree_) * dt_; }

  Sample evaluate(double t) const;

  std::vector<Vec3> velocity_points() const;      // V_i = (Q_{i+1} − Q_i)/dt
  std::vector<Vec3> acceleration_points() const;  // A_i = (V_{i+1} − V_i)/dt

 private:
  std::vector<Vec3> ctrl_;
  double dt_ = 0.1;
  int degree_ = 3;
};

/// Weight of control point Q_{s−k} inside segment s at local parameter
/// u ∈ [0, 1], differentiated `deriv` times with respect to u.
double bspline_weight(int degree, int k, double u, int deriv = 0);

/// Least-squares fit to sampled positions with the first and last position
/// and velocity imposed exactly. Boundary accelerations are matched through
/// heavily weighted rows. The spline has samples.size() − 1 + degree control
/// points so that knot k coincides with sample k.
UniformBSpline fit_from_samples(const PathSamples& samples, int degree = 3);

/// Samples the search path every `dt` seconds and fits it.
UniformBSpline fit_from_path(const std::vector<PathNode>& path, double dt, int degree = 3);

}  // namespace bimodal
