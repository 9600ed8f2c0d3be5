#pragma once

#include "bimodal/bounds.hpp"
#include "bimodal/bspline.hpp"
#include "bimodal/esdf.hpp"
#include "bimodal/optimize.hpp"
#include "bimodal/search.hpp"

#include <optional>

namespace bimodal {

struct PlannerConfig {
  SearchConfig search;
  OptimizeConfig optimize;
  bool optimize_enabled = true;
  // Downward search: extra room below the air z-bound and a stronger
  // preference for ground nodes.
  double descent_extra = 1.0;
  double descent_altitude_weight = 20.0;

  void validate() const;
};

struct PlanRequest {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();  // matched softly at the start of the fit
  Vec3 goal = Vec3::Zero();
  SearchPolicy policy;
  std::optional<Vec3> waypoint;      // pass through this point first (detours)
  double altitude_weight = -1.0;     // overrides search.weight_altitude when >= 0
};

struct PlanOutcome {
  SearchResult search;
  std::optional<UniformBSpline> spline;
  OptimizeResult optimization;
  double search_ms = 0.0;
  double optimize_ms = 0.0;

  bool ok() const { return spline.has_value(); }
};

/// One planning cycle: kinodynamic search, least-squares fit, optimization.
PlanOutcome plan_trajectory(const PlanRequest& request, const Esdf& esdf,
                            const BoundsPair& bounds, const PlannerConfig& cfg);

/// Bounds for the downward search: the air z-minimum lowered by `descent_extra`.
BoundsPair descent_bounds(const BoundsPair& bounds, double descent_extra);

/// Executable trajectory: a spline started at an absolute time.
struct Trajectory {
  UniformBSpline spline;
  double start_time = 0.0;

  double end_time() const { return start_time + spline.duration(); }
  UniformBSpline::Sample at(double t) const;
  /// `count` positions every `spacing` seconds, starting `spacing` after t.
  std::vector<Vec3> horizon(double t, int count, double spacing) const;
};

/// A constant trajectory that holds `p`.
Trajectory hold_trajectory(const Vec3& p, double start_time, double knot_interval);

}  // namespace bimodal
