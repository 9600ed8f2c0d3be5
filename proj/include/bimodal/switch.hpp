#pragma once

#include "bimodal/core.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bimodal {

struct SwitchConfig {
  double air_threshold = 1.5;     // δ_air, on the gravity-compensated air estimate
  double ground_threshold = 1.0;  // δ_ground
  double altitude_threshold = 0.3;
  int horizon = 20;               // H
  double horizon_spacing = 0.1;   // s between horizon points
  double dwell_time = 1.0;        // minimum time in a mode before switching again
  double detour_offset = 1.5;     // lateral waypoint offset W
  double detour_lookahead = 2.0;  // waypoint distance along the current heading
  double settle_time = 0.1;       // ignore the air estimate this long after a reset

  void validate() const;
};

enum class SwitchAction { None, DetourReplanned, SwitchedToAir, SwitchedToLand };

std::string_view to_string(SwitchAction a);

/// A re-planned trajectory offered to the decision by a callback.
struct PlanCandidate {
  std::vector<Vec3> horizon;  // H points sampled along the candidate
  double exposure = 0.0;      // predicted disturbance magnitude along it (detours)
  int plan_id = -1;           // caller-side handle for adopting the plan
};

/// Called with side +1 (left of travel) or −1 (right).
using DetourPlanner = std::function<std::optional<PlanCandidate>(int side)>;
/// Upward search from Land or downward search from Air.
using VerticalPlanner = std::function<std::optional<PlanCandidate>()>;

struct ModeDecision {
  Mode next_mode = Mode::Land;
  SwitchAction action = SwitchAction::None;
  double triggering_magnitude = 0.0;
  // Plan the caller should execute (detour, vertical or descending plan).
  std::optional<PlanCandidate> adopted;
  bool triggered = false;       // the disturbance guard fired
  bool detour_attempted = false;
  bool detour_found = false;
  std::string error;            // set when a callback produced no plan at all
};

/// ‖d̂1 + g‖: the air estimate with the gravity term removed.
double gravity_compensated_air_magnitude(const Vec3& d1_hat, double gravity = kGravity);

bool all_above(const std::vector<Vec3>& horizon, double r_thr);
bool all_at_or_below(const std::vector<Vec3>& horizon, double r_thr);

/// Mode switching decision. Land: when ‖d̂2‖ exceeds δ_ground, try a detour
/// (both sides, lowest exposure below δ_ground wins); otherwise run the
/// upward search and switch to Air when every horizon point is above r_thr.
/// Air: when the compensated ‖d̂1‖ exceeds δ_air, run the downward search and
/// switch to Land when every horizon point is at or below r_thr.
///
/// `horizon` is the current trajectory's horizon; it is used for the ∀ check
/// when no vertical planner is supplied. `air_estimate_age` suppresses the
/// air guard right after an observer reset. Dwell time is the caller's job.
ModeDecision decide(Mode mode, const Vec3& d1_hat, const Vec3& d2_hat,
                    const std::vector<Vec3>& horizon, const SwitchConfig& cfg,
                    const DetourPlanner& detour_planner, const VerticalPlanner& vertical_planner,
                    double air_estimate_age = std::numeric_limits<double>::infinity(),
                    double gravity = kGravity);

}  // namespace bimodal
