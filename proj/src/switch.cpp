#include "bimodal/switch.hpp"

#include <algorithm>

namespace bimodal {

void SwitchConfig::validate() const {
  if (!(air_threshold > 0.0)) throw InvalidArgument("switch.air_threshold must be positive");
  if (!(ground_threshold > 0.0)) throw InvalidArgument("switch.ground_threshold must be positive");
  if (!(altitude_threshold > 0.0)) throw InvalidArgument("switch.altitude_threshold must be positive");
  if (horizon < 1) throw InvalidArgument("switch.horizon must be >= 1");
  if (!(horizon_spacing > 0.0)) throw InvalidArgument("switch.horizon_spacing must be positive");
  if (dwell_time < 0.0) throw InvalidArgument("switch.dwell_time must be non-negative");
  if (!(detour_offset > 0.0)) throw InvalidArgument("switch.detour_offset must be positive");
  if (!(detour_lookahead > 0.0)) throw InvalidArgument("switch.detour_lookahead must be positive");
  if (settle_time < 0.0) throw InvalidArgument("switch.settle_time must be non-negative");
}

std::string_view to_string(SwitchAction a) {
  switch (a) {
    case SwitchAction::None: return "none";
    case SwitchAction::DetourReplanned: return "detour_replanned";
    case SwitchAction::SwitchedToAir: return "switched_to_air";
    case SwitchAction::SwitchedToLand: return "switched_to_land";
  }
  return "unknown";
}

double gravity_compensated_air_magnitude(const Vec3& d1_hat, double gravity) {
  return (d1_hat + gravity_vector(gravity)).norm();
}

bool all_above(const std::vector<Vec3>& horizon, double r_thr) {
  return !horizon.empty() &&
         std::all_of(horizon.begin(), horizon.end(), [&](const Vec3& p) { return p.z() > r_thr; });
}

bool all_at_or_below(const std::vector<Vec3>& horizon, double r_thr) {
  return !horizon.empty() &&
         std::all_of(horizon.begin(), horizon.end(), [&](const Vec3& p) { return p.z() <= r_thr; });
}

ModeDecision decide(Mode mode, const Vec3& d1_hat, const Vec3& d2_hat,
                    const std::vector<Vec3>& horizon, const SwitchConfig& cfg,
                    const DetourPlanner& detour_planner, const VerticalPlanner& vertical_planner,
                    double air_estimate_age, double gravity) {
  if (horizon.empty()) throw InvalidArgument("decide: horizon must not be empty");
  ModeDecision out;
  out.next_mode = mode;

  if (mode == Mode::Land) {
    const double mag = d2_hat.norm();
    out.triggering_magnitude = mag;
    if (!(mag > cfg.ground_threshold)) return out;
    out.triggered = true;

    if (detour_planner) {
      out.detour_attempted = true;
      std::optional<PlanCandidate> best;
      for (int side : {+1, -1}) {
        auto c = detour_planner(side);
        if (!c || !(c->exposure < cfg.ground_threshold)) continue;
        if (!best || c->exposure < best->exposure) best = std::move(c);
      }
      if (best) {
        out.detour_found = true;
        out.action = SwitchAction::DetourReplanned;
        out.adopted = std::move(best);
        return out;
      }
    }

    std::optional<PlanCandidate> up;
    if (vertical_planner) {
      up = vertical_planner();
      if (!up) {
        out.error = "upward search found no plan";
        return out;
      }
    } else {
      up = PlanCandidate{horizon, 0.0, -1};
    }
    if (all_above(up->horizon, cfg.altitude_threshold)) {
      out.next_mode = Mode::Air;
      out.action = SwitchAction::SwitchedToAir;
      out.adopted = std::move(up);
    }
    return out;
  }

  const double mag = gravity_compensated_air_magnitude(d1_hat, gravity);
  out.triggering_magnitude = mag;
  if (air_estimate_age < cfg.settle_time) return out;
  if (!(mag > cfg.air_threshold)) return out;
  out.triggered = true;

  std::optional<PlanCandidate> down;
  if (vertical_planner) {
    down = vertical_planner();
    if (!down) {
      out.error = "downward search found no plan";
      return out;
    }
  } else {
    down = PlanCandidate{horizon, 0.0, -1};
  }
  if (all_at_or_below(down->horizon, cfg.altitude_threshold)) {
    out.next_mode = Mode::Land;
    out.action = SwitchAction::SwitchedToLand;
  }
  out.adopted = std::move(down);
  return out;
}

}  // namespace bimodal
