#include "bimodal/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>

namespace bimodal {

void OptimizeConfig::validate() const {
  if (weight_smooth < 0 || weight_collision < 0 || weight_velocity < 0 || weight_accel < 0) {
    throw InvalidArgument("optimize weights must be non-negative");
  }
  if (!(beta > 0.0)) throw InvalidArgument("optimize.beta must be positive");
  if (!(max_speed > 0.0)) throw InvalidArgument("optimize.max_speed must be positive");
  if (clearance < 0.0) throw InvalidArgument("optimize.clearance must be non-negative");
  if (max_iterations < 0) throw InvalidArgument("optimize.max_iterations must be non-negative");
  if (memory < 1) throw InvalidArgument("optimize.memory must be >= 1");
}

double softplus(double x, double beta) {
  return std::max(x, 0.0) + std::log1p(std::exp(-beta * std::abs(x))) / beta;
}

double softplus_derivative(double x, double beta) {
  const double z = beta * x;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

CostTerm accel_penalty(const UniformBSpline& spline, const BoundsPair& bounds, double r_thr,
                       double beta) {
  const auto& Q = spline.control_points();
  const int N = static_cast<int>(Q.size()) - 1;
  const int p = spline.degree();
  const double inv_dt2 = 1.0 / (spline.knot_interval() * spline.knot_interval());
  CostTerm out;
  out.gradient.assign(Q.size(), Vec3::Zero());
  for (int i = std::max(p - 2, 0); i <= N - p && i + 2 <= N; ++i) {
    const Vec3 A = (Q[i + 2] - 2.0 * Q[i + 1] + Q[i]) * inv_dt2;
    const AccelBounds& b = bounds.for_altitude(Q[i].z(), r_thr);
    Vec3 dA = Vec3::Zero();
    for (int mu = 0; mu < 3; ++mu) {
      const double lo = b.min[mu] - A[mu];
      const double hi = A[mu] - b.max[mu];
      const double sl = softplus(lo, beta), sh = softplus(hi, beta);
      out.value += sl * sl + sh * sh;
      dA[mu] = -2.0 * sl * softplus_derivative(lo, beta) + 2.0 * sh * softplus_derivative(hi, beta);
    }
    // The bound selection is piecewise constant in Q_i^z, so it adds nothing.
    out.gradient[i] += dA * inv_dt2;
    out.gradient[i + 1] -= 2.0 * dA * inv_dt2;
    out.gradient[i + 2] += dA * inv_dt2;
  }
  return out;
}

CostTerm smoothness_cost(const UniformBSpline& spline) {
  const auto& Q = spline.control_points();
  CostTerm out;
  out.gradient.assign(Q.size(), Vec3::Zero());
  for (std::size_t i = 0; i + 2 < Q.size(); ++i) {
    const Vec3 d = Q[i + 2] - 2.0 * Q[i + 1] + Q[i];
    out.value += d.squaredNorm();
    out.gradient[i] += 2.0 * d;
    out.gradient[i + 1] -= 4.0 * d;
    out.gradient[i + 2] += 2.0 * d;
  }
  return out;
}

CostTerm collision_cost(const UniformBSpline& spline, const Esdf& esdf, double d_thr) {
  const auto& Q = spline.control_points();
  CostTerm out;
  out.gradient.assign(Q.size(), Vec3::Zero());
  for (std::size_t i = 0; i < Q.size(); ++i) {
    const DistanceQuery q = esdf.query(Q[i]);
    if (q.out_of_bounds) continue;
    const double h = d_thr - q.distance;
    if (h <= 0.0) continue;
    out.value += h * h;
    out.gradient[i] = -2.0 * h * q.gradient;
  }
  return out;
}

CostTerm velocity_cost(const UniformBSpline& spline, double v_max) {
  const auto& Q = spline.control_points();
  const double dt = spline.knot_interval();
  CostTerm out;
  out.gradient.assign(Q.size(), Vec3::Zero());
  for (std::size_t i = 0; i + 1 < Q.size(); ++i) {
    const Vec3 V = (Q[i + 1] - Q[i]) / dt;
    for (int mu = 0; mu < 3; ++mu) {
      const double h = std::abs(V[mu]) - v_max;
      if (h <= 0.0) continue;
      out.value += h * h;
      const double g = 2.0 * h * (V[mu] > 0.0 ? 1.0 : -1.0) / dt;
      out.gradient[i + 1][mu] += g;
      out.gradient[i][mu] -= g;
    }
  }
  return out;
}

CostBreakdown total_cost(const UniformBSpline& spline, const OptimizeConfig& cfg,
                         const Esdf& esdf, const BoundsPair& bounds, double r_thr) {
  CostBreakdown out;
  out.gradient.assign(spline.size(), Vec3::Zero());
  auto add = [&](double weight, const CostTerm& term, double& slot) {
    slot = term.value;
    if (weight == 0.0) return;
    out.total += weight * term.value;
    for (std::size_t i = 0; i < term.gradient.size(); ++i) out.gradient[i] += weight * term.gradient[i];
  };
  if (cfg.weight_smooth != 0.0) add(cfg.weight_smooth, smoothness_cost(spline), out.smooth);
  if (cfg.weight_collision != 0.0) {
    add(cfg.weight_collision, collision_cost(spline, esdf, cfg.clearance), out.collision);
  }
  if (cfg.weight_velocity != 0.0) {
    add(cfg.weight_velocity, velocity_cost(spline, cfg.max_speed), out.velocity);
  }
  if (cfg.weight_accel != 0.0) {
    add(cfg.weight_accel, accel_penalty(spline, bounds, r_thr, cfg.beta), out.accel);
  }
  return out;
}

double max_accel_violation(const UniformBSpline& spline, const BoundsPair& bounds, double r_thr) {
  const auto& Q = spline.control_points();
  const int N = static_cast<int>(Q.size()) - 1;
  const int p = spline.degree();
  const double inv_dt2 = 1.0 / (spline.knot_interval() * spline.knot_interval());
  double worst = 0.0;
  for (int i = std::max(p - 2, 0); i <= N - p && i + 2 <= N; ++i) {
    const Vec3 A = (Q[i + 2] - 2.0 * Q[i + 1] + Q[i]) * inv_dt2;
    const AccelBounds& b = bounds.for_altitude(Q[i].z(), r_thr);
    for (int mu = 0; mu < 3; ++mu) {
      worst = std::max({worst, b.min[mu] - A[mu], A[mu] - b.max[mu]});
    }
  }
  return worst;
}

namespace {

class Problem {
 public:
  Problem(const UniformBSpline& initial, const OptimizeConfig& cfg, const Esdf& esdf,
          const BoundsPair& bounds, double r_thr)
      : spline_(initial), cfg_(cfg), esdf_(esdf), bounds_(bounds), r_thr_(r_thr) {
    first_ = initial.degree();
    last_ = static_cast<int>(initial.size()) - initial.degree();  // exclusive
  }

  int dimension() const { return std::max(0, 3 * (last_ - first_)); }

  Eigen::VectorXd pack() const {
    Eigen::VectorXd x(dimension());
    for (int i = first_; i < last_; ++i) x.segment<3>(3 * (i - first_)) = spline_.control_points()[i];
    return x;
  }

  const UniformBSpline& unpack(const Eigen::VectorXd& x) {
    for (int i = first_; i < last_; ++i) {
      Vec3& q = spline_.control_points()[i];
      const double z = q.z();
      q = x.segment<3>(3 * (i - first_));
      if (cfg_.planar) q.z() = z;
    }
    return spline_;
  }

  double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    unpack(x);
    const CostBreakdown c = total_cost(spline_, cfg_, esdf_, bounds_, r_thr_);
    grad.resize(dimension());
    for (int i = first_; i < last_; ++i) {
      Vec3 g = c.gradient[i];
      if (cfg_.planar) g.z() = 0.0;
      grad.segment<3>(3 * (i - first_)) = g;
    }
    return c.total;
  }

 private:
  UniformBSpline spline_;
  const OptimizeConfig& cfg_;
  const Esdf& esdf_;
  const BoundsPair& bounds_;
  double r_thr_;
  int first_ = 0, last_ = 0;
};

}  // namespace

OptimizeResult optimize(const UniformBSpline& initial, const OptimizeConfig& cfg,
                        const Esdf& esdf, const BoundsPair& bounds, double r_thr) {
  cfg.validate();
  OptimizeResult result;
  result.spline = initial;
  Problem problem(initial, cfg, esdf, bounds, r_thr);
  Eigen::VectorXd x = problem.pack();
  Eigen::VectorXd g;
  double f = problem.evaluate(x, g);
  result.initial_cost = f;
  result.final_cost = f;
  if (!std::isfinite(f)) {
    result.degraded = true;
    return result;
  }
  if (problem.dimension() == 0) {
    result.converged = true;
    return result;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  constexpr double kArmijo = 1e-4;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance) {
      result.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      gamma = 1.0 / std::max(1.0, g.norm());
    }
    Eigen::VectorXd d = gamma * q;
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += s_hist[k] * (alpha[k] - beta);
    }
    d = -d;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g / std::max(1.0, g.norm());
      slope = g.dot(d);
    }

    double step = 1.0;
    Eigen::VectorXd x_new, g_new;
    double f_new = f;
    bool accepted = false;
    bool saw_nonfinite = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * d;
      f_new = problem.evaluate(x_new, g_new);
      if (!std::isfinite(f_new)) {
        saw_nonfinite = true;
      } else if (f_new <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    result.iterations = iter + 1;
    if (!accepted) {
      result.degraded = saw_nonfinite;
      break;
    }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double decrease = f - f_new;
    x = x_new;
    g = g_new;
    f = f_new;
    if (decrease <= 1e-12 * std::max(1.0, std::abs(f))) {
      result.converged = g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance;
      break;
    }
  }
  Eigen::VectorXd scratch;
  problem.evaluate(x, scratch);
  result.spline = problem.unpack(x);
  result.final_cost = f;
  return result;
}

}  // namespace bimodal
