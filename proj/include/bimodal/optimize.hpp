#pragma once

#include "bimodal/bounds.hpp"
#include "bimodal/bspline.hpp"
#include "bimodal/esdf.hpp"

#include <vector>

namespace bimodal {

struct OptimizeConfig {
  double weight_smooth = 1.0;      // λ_s
  double weight_collision = 10.0;  // λ_c
  double weight_velocity = 1.0;    // λ_v
  double weight_accel = 1.0;       // λ_a
  double beta = 10.0;              // softplus sharpness
  double max_speed = 2.0;
  double clearance = 0.4;          // d_thr
  int max_iterations = 100;
  double gradient_tolerance = 1e-5;
  int memory = 8;
  // Keep z fixed for ground trajectories.
  bool planar = false;

  void validate() const;
};

struct CostTerm {
  double value = 0.0;
  std::vector<Vec3> gradient;  // d value / d Q_i
};

/// max(x, 0) + log(1 + e^{−β|x|})/β, which equals log(1 + e^{βx})/β.
double softplus(double x, double beta);

/// d softplus / dx, the logistic function of βx.
double softplus_derivative(double x, double beta);

/// Σ_μ Σ_{i=p−2}^{N−p} softplus(a_min − A_i)² + softplus(A_i − a_max)². Term i
/// uses the air bounds when Q_i^z > r_thr and the land bounds otherwise.
CostTerm accel_penalty(const UniformBSpline& spline, const BoundsPair& bounds, double r_thr,
                       double beta);

/// Σ_i ‖Q_{i+2} − 2Q_{i+1} + Q_i‖².
CostTerm smoothness_cost(const UniformBSpline& spline);

/// Σ_i max(d_thr − dist(Q_i), 0)². Points outside the map count as fully clear.
CostTerm collision_cost(const UniformBSpline& spline, const Esdf& esdf, double d_thr);

/// Σ_μ Σ_i max(|V_i^μ| − v_max, 0)².
CostTerm velocity_cost(const UniformBSpline& spline, double v_max);

struct CostBreakdown {
  double smooth = 0.0, collision = 0.0, velocity = 0.0, accel = 0.0;
  double total = 0.0;
  std::vector<Vec3> gradient;
};

CostBreakdown total_cost(const UniformBSpline& spline, const OptimizeConfig& cfg,
                         const Esdf& esdf, const BoundsPair& bounds, double r_thr);

struct OptimizeResult {
  UniformBSpline spline;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degraded = false;  // a non-finite cost stopped the solver
};

/// L-BFGS with backtracking (Armijo) line search over the interior control
/// points; the first and last `degree` points stay fixed.
OptimizeResult optimize(const UniformBSpline& initial, const OptimizeConfig& cfg,
                        const Esdf& esdf, const BoundsPair& bounds, double r_thr);

/// Largest per-axis amount by which any penalised A_i leaves its bounds.
double max_accel_violation(const UniformBSpline& spline, const BoundsPair& bounds, double r_thr);

}  // namespace bimodal
