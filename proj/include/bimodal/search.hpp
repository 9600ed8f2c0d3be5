#pragma once

#include "bimodal/bounds.hpp"
#include "bimodal/core.hpp"
#include "bimodal/esdf.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace bimodal {

struct MotionPrimitive {
  Vec3 accel = Vec3::Zero();
  double duration = 0.0;
};

struct SearchConfig {
  double altitude_threshold = 0.3;  // r_thr
  double epsilon = 1e-3;
  int samples_per_axis = 3;         // odd, >= 3
  bool velocity_window = true;      // sample inside the speed-reachable window
  bool include_zero_accel = true;   // add a = 0 per axis when inside the bounds
  double primitive_duration = 0.4;  // τ
  double position_resolution = 0.1;
  double velocity_bin = 0.5;
  double max_speed = 2.0;
  double weight_altitude = 1.0;     // w_e
  double weight_direction = 1.0;    // w_d
  double time_weight = 10.0;        // ρ
  double heuristic_weight = 3.0;    // inflation of h_c; 1 keeps it admissible
  double goal_tolerance = 0.3;
  double clearance = 0.3;
  double touchdown_speed = 1.5;     // max |v_z| when entering the ground band
  int max_expansions = 20000;

  void validate() const;
};

/// Which primitive families a query may use. Nodes at or below the altitude
/// threshold are grounded (z = 0, v_z = 0); nodes above it are airborne.
struct SearchPolicy {
  Mode mode = Mode::Land;
  bool allow_takeoff = false;  // grounded → airborne primitives
  bool allow_landing = false;  // airborne → grounded anywhere (not only at the goal)

  static SearchPolicy for_mode(Mode m) { return {m, m == Mode::Air, false}; }
};

struct PathNode {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double g_cost = 0.0;
  double h_cost = 0.0;
  int parent = -1;                // index into the returned path, -1 for the root
  MotionPrimitive primitive;      // input that produced this node from its parent
  Mode mode_tag = Mode::Land;

  double f_cost() const { return g_cost + h_cost; }
};

enum class SearchStatus { Success, NoPathFound, StartInCollision, GoalInCollision };

std::string_view to_string(SearchStatus s);

struct SearchResult {
  SearchStatus status = SearchStatus::NoPathFound;
  std::vector<PathNode> path;  // root → goal
  double cost = 0.0;           // g of the goal node
  int expansions = 0;
  int bounds_violations = 0;   // primitives found outside their bounds (always 0)

  bool ok() const { return status == SearchStatus::Success; }
  double duration() const;
};

/// Optional observer invoked for each generated primitive.
using ExpansionHook = std::function<void(const PathNode& parent, const MotionPrimitive& prim,
                                         const AccelBounds& bounds)>;

/// Altitude penalty F_e: (r3 − r_thr)² above the threshold, 0 otherwise.
double altitude_penalty(double altitude, double altitude_threshold);

/// Σ_μ min(a − a_min, a_max − a).
double bounds_margin(const Vec3& accel, const AccelBounds& bounds);

/// Directional penalty F_d = 1/(ε + c(a)); bounds selected by altitude.
/// Returns nullopt when `accel` lies outside the selected bounds.
std::optional<double> directional_penalty(const Vec3& accel, const BoundsPair& bounds,
                                          double altitude, const SearchConfig& cfg);

/// Minimum time for a 1-D double integrator at (x, v) to reach `target`
/// within `tolerance` under a ∈ [a_min, a_max] and |v| ≤ v_max (cruise
/// assumed free). Infinity when unreachable.
double min_time_1d(double x, double v, double target, double tolerance, double a_min,
                   double a_max, double v_max);

/// Baseline kinodynamic heuristic h_c: ρ · max over axes of min_time_1d.
double baseline_heuristic(const Vec3& position, const Vec3& velocity, const Vec3& goal,
                          const AccelBounds& bounds, const SearchConfig& cfg);

/// h_new = h_c + w_e·F_e(r3) + w_d·F_d(a). `incoming` is the primitive
/// acceleration that created the node (nullopt for the root).
double heuristic(const Vec3& position, const Vec3& velocity, const std::optional<Vec3>& incoming,
                 const Vec3& goal, const BoundsPair& bounds, const SearchConfig& cfg);

/// Per-axis acceleration samples: `samples_per_axis` evenly spaced values
/// over each interval (a degenerate interval yields one value), plus zero.
/// With `velocity` and cfg.velocity_window, each interval is first narrowed
/// to the accelerations that keep |v_i| under the speed cap; empty if none.
std::vector<Vec3> primitive_accels(const AccelBounds& bounds, const SearchConfig& cfg,
                                   const std::optional<Vec3>& velocity = std::nullopt);

/// Closed-form double-integrator propagation.
inline void propagate(const Vec3& p, const Vec3& v, const Vec3& a, double t, Vec3& p_out,
                      Vec3& v_out) {
  p_out = p + v * t + 0.5 * a * t * t;
  v_out = v + a * t;
}

/// Kinodynamic A* over (position, velocity) with f = g_c + h_new and
/// g_c = Σ (‖a‖² + ρ)·τ.
SearchResult kinodynamic_search(const Vec3& start_pos, const Vec3& start_vel, const Vec3& goal,
                                const Esdf& map, const BoundsPair& bounds,
                                const SearchConfig& cfg, const SearchPolicy& policy,
                                const ExpansionHook& hook = {});

/// Sample the path's primitives every `dt` seconds (positions, velocities,
/// accelerations), including the final state.
struct PathSamples {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> accelerations;
  double dt = 0.0;
};
PathSamples sample_path(const std::vector<PathNode>& path, double dt);

}  // namespace bimodal
