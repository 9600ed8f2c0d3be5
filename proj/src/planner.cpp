#include "bimodal/planner.hpp"

#include <chrono>

namespace bimodal {

void PlannerConfig::validate() const {
  search.validate();
  optimize.validate();
  if (descent_extra < 0.0) throw InvalidArgument("planner.descent_extra must be non-negative");
  if (descent_altitude_weight < 0.0) {
    throw InvalidArgument("planner.descent_altitude_weight must be non-negative");
  }
}

BoundsPair descent_bounds(const BoundsPair& bounds, double descent_extra) {
  BoundsPair out = bounds;
  out.air.min.z() -= descent_extra;
  return out;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

PlanOutcome plan_trajectory(const PlanRequest& request, const Esdf& esdf,
                            const BoundsPair& bounds, const PlannerConfig& cfg) {
  PlanOutcome out;
  SearchConfig scfg = cfg.search;
  if (request.altitude_weight >= 0.0) scfg.weight_altitude = request.altitude_weight;

  const auto t0 = std::chrono::steady_clock::now();
  if (request.waypoint) {
    SearchResult first = kinodynamic_search(request.position, request.velocity, *request.waypoint,
                                            esdf, bounds, scfg, request.policy);
    if (!first.ok()) {
      out.search = std::move(first);
      out.search_ms = elapsed_ms(t0);
      return out;
    }
    const PathNode& mid = first.path.back();
    SearchResult second =
        kinodynamic_search(mid.position, mid.velocity, request.goal, esdf, bounds, scfg,
                           request.policy);
    out.search = second;
    out.search.expansions += first.expansions;
    out.search.bounds_violations += first.bounds_violations;
    if (second.ok()) {
      out.search.cost = first.cost + second.cost;
      out.search.path = first.path;
      for (std::size_t i = 1; i < second.path.size(); ++i) {
        PathNode n = second.path[i];
        n.parent = static_cast<int>(out.search.path.size()) - 1;
        n.g_cost += first.cost;
        out.search.path.push_back(n);
      }
    }
  } else {
    out.search = kinodynamic_search(request.position, request.velocity, request.goal, esdf,
                                    bounds, scfg, request.policy);
  }
  out.search_ms = elapsed_ms(t0);
  if (!out.search.ok()) return out;

  const auto t1 = std::chrono::steady_clock::now();
  const int degree = 3;
  PathSamples samples = sample_path(out.search.path, 0.5 * scfg.primitive_duration);
  samples.accelerations.front() = request.acceleration;
  UniformBSpline spline = fit_from_samples(samples, degree);

  OptimizeConfig ocfg = cfg.optimize;
  const bool ground_only = request.policy.mode == Mode::Land && !request.policy.allow_takeoff;
  ocfg.planar = ocfg.planar || ground_only;
  if (cfg.optimize_enabled) {
    out.optimization = optimize(spline, ocfg, esdf, bounds, scfg.altitude_threshold);
    spline = out.optimization.spline;
  } else {
    out.optimization.spline = spline;
    out.optimization.converged = true;
  }
  out.optimize_ms = elapsed_ms(t1);
  out.spline = std::move(spline);
  return out;
}

UniformBSpline::Sample Trajectory::at(double t) const {
  return spline.evaluate(t - start_time);
}

std::vector<Vec3> Trajectory::horizon(double t, int count, double spacing) const {
  std::vector<Vec3> out;
  out.reserve(count);
  for (int i = 1; i <= count; ++i) out.push_back(at(t + i * spacing).position);
  return out;
}

Trajectory hold_trajectory(const Vec3& p, double start_time, double knot_interval) {
  return {UniformBSpline(std::vector<Vec3>(4, p), knot_interval, 3), start_time};
}

}  // namespace bimodal
