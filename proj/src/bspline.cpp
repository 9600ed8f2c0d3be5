#include "bimodal/bspline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace bimodal {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

}  // namespace

double bspline_weight(int degree, int k, double u, int deriv) {
  // Cardinal B-spline as a sum of truncated powers. On segment k only the
  // first k + 1 terms are active, which also fixes the value at u = 1.
  if (deriv > degree) return 0.0;
  const int power = degree - deriv;
  const double scale = factorial(degree) / factorial(power);
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double x = u + k - j;
    const double term = power == 0 ? 1.0 : std::pow(x, power);
    sum += ((j % 2) ? -1.0 : 1.0) * binomial(degree + 1, j) * term;
  }
  return scale * sum / factorial(degree);
}

UniformBSpline::UniformBSpline(std::vector<Vec3> control_points, double knot_interval, int degree)
    : ctrl_(std::move(control_points)), dt_(knot_interval), degree_(degree) {
  if (degree_ < 1) throw InvalidArgument("spline degree must be >= 1");
  if (!(dt_ > 0.0)) throw InvalidArgument("spline knot interval must be positive");
  if (static_cast<int>(ctrl_.size()) <= degree_) {
    throw InvalidArgument("spline needs more than degree control points");
  }
}

UniformBSpline::Sample UniformBSpline::evaluate(double t) const {
  Sample out;
  const double T = duration();
  if (t < 0.0 || t > T) {
    out.clamped = true;
    t = std::clamp(t, 0.0, T);
  }
  const int n = static_cast<int>(ctrl_.size());
  const double x = t / dt_ + degree_;
  const int s = std::min(static_cast<int>(std::floor(x)), n - 1);
  const double u = x - s;
  for (int k = 0; k <= degree_; ++k) {
    const Vec3& q = ctrl_[s - k];
    out.position += bspline_weight(degree_, k, u, 0) * q;
    out.velocity += bspline_weight(degree_, k, u, 1) * q;
    out.acceleration += bspline_weight(degree_, k, u, 2) * q;
  }
  out.velocity /= dt_;
  out.acceleration /= dt_ * dt_;
  return out;
}

std::vector<Vec3> UniformBSpline::velocity_points() const {
  std::vector<Vec3> v;
  for (std::size_t i = 0; i + 1 < ctrl_.size(); ++i) v.push_back((ctrl_[i + 1] - ctrl_[i]) / dt_);
  return v;
}

std::vector<Vec3> UniformBSpline::acceleration_points() const {
  std::vector<Vec3> a;
  for (std::size_t i = 0; i + 2 < ctrl_.size(); ++i) {
    a.push_back((ctrl_[i + 2] - 2.0 * ctrl_[i + 1] + ctrl_[i]) / (dt_ * dt_));
  }
  return a;
}

UniformBSpline fit_from_samples(const PathSamples& samples, int degree) {
  if (samples.positions.empty()) throw InvalidArgument("fit: no samples");
  if (!(samples.dt > 0.0)) throw InvalidArgument("fit: sample spacing must be positive");
  PathSamples s = samples;
  if (s.positions.size() == 1) {
    s.positions.push_back(s.positions[0]);
    s.velocities.push_back(s.velocities[0]);
    s.accelerations.push_back(s.accelerations[0]);
  }
  const int M = static_cast<int>(s.positions.size()) - 1;
  const int n = M + degree;
  const double dt = s.dt;

  // Row of basis weights for knot k (u = 0 of segment k + degree).
  auto knot_row = [&](int k, int deriv) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    const int seg = std::min(k + degree, n - 1);
    const double u = static_cast<double>(k + degree - seg);
    for (int j = 0; j <= degree; ++j) {
      row(seg - j) = bspline_weight(degree, j, u, deriv) / std::pow(dt, deriv);
    }
    return row;
  };

  constexpr double kAccelWeight = 1e3;
  const bool with_accel = degree >= 2;
  const int ls_rows = (M + 1) + (with_accel ? 2 : 0);
  Eigen::MatrixXd A(ls_rows, n);
  Eigen::MatrixXd b(ls_rows, 3);
  for (int k = 0; k <= M; ++k) {
    A.row(k) = knot_row(k, 0);
    b.row(k) = s.positions[k].transpose();
  }
  if (with_accel) {
    A.row(M + 1) = kAccelWeight * knot_row(0, 2);
    b.row(M + 1) = kAccelWeight * s.accelerations.front().transpose();
    A.row(M + 2) = kAccelWeight * knot_row(M, 2);
    b.row(M + 2) = kAccelWeight * s.accelerations.back().transpose();
  }

  Eigen::MatrixXd C(4, n);
  Eigen::MatrixXd d(4, 3);
  C.row(0) = knot_row(0, 0);
  d.row(0) = s.positions.front().transpose();
  C.row(1) = knot_row(0, 1);
  d.row(1) = s.velocities.front().transpose();
  C.row(2) = knot_row(M, 0);
  d.row(2) = s.positions.back().transpose();
  C.row(3) = knot_row(M, 1);
  d.row(3) = s.velocities.back().transpose();

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 4, n + 4);
  K.topLeftCorner(n, n) = A.transpose() * A;
  K.topRightCorner(n, 4) = C.transpose();
  K.bottomLeftCorner(4, n) = C;
  Eigen::MatrixXd rhs(n + 4, 3);
  rhs.topRows(n) = A.transpose() * b;
  rhs.bottomRows(4) = d;
  const Eigen::MatrixXd sol = K.completeOrthogonalDecomposition().solve(rhs);

  std::vector<Vec3> ctrl(n);
  for (int i = 0; i < n; ++i) ctrl[i] = sol.row(i).transpose();
  return UniformBSpline(std::move(ctrl), dt, degree);
}

UniformBSpline fit_from_path(const std::vector<PathNode>& path, double dt, int degree) {
  if (path.empty()) throw InvalidArgument("fit: empty path");
  return fit_from_samples(sample_path(path, dt), degree);
}

}  // namespace bimodal
