#include "bimodal/simulator.hpp"

#include "bimodal/bounds.hpp"
#include "bimodal/observer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace bimodal {

namespace {
constexpr double kSmoothingSpeed = 0.05;  // m/s, tanh scale for friction
constexpr double kTakeoffWindow = 1.5;    // s, time allowed to climb above r_thr
}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

std::array<Vec2, 4> wheel_offsets(const VehicleParams& p) {
  const double half = p.wheel_track / 2.0;
  return {Vec2(p.front_offset, half), Vec2(p.front_offset, -half), Vec2(-p.rear_offset, -half),
          Vec2(-p.rear_offset, half)};
}

SampledDisturbance sample_disturbance(const DisturbanceFields& fields, const VehicleState& state,
                                      const VehicleParams& p) {
  SampledDisturbance out;
  for (const WindZone& w : fields.wind) {
    if (w.contains(state.position)) out.d_air += w.force_at(state.time);
  }
  if (state.mode != Mode::Land || fields.resistance.empty()) return out;

  const double yaw = state.yaw();
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec2 v_body(c * state.velocity.x() + s * state.velocity.y(),
                    -s * state.velocity.x() + c * state.velocity.y());
  const double yaw_rate = state.angular_velocity.z();
  const double load = p.mass * p.gravity / 4.0;
  const auto offsets = wheel_offsets(p);
  for (int i = 0; i < 4; ++i) {
    const Vec2& r = offsets[i];
    const Vec2 world(state.position.x() + c * r.x() - s * r.y(),
                     state.position.y() + s * r.x() + c * r.y());
    const double v_long = v_body.x() - yaw_rate * r.y();
    const double v_lat = v_body.y() + yaw_rate * r.x();
    for (const ResistanceZone& z : fields.resistance) {
      if (!z.contains(world)) continue;
      out.ground.longitudinal[i] += z.friction * load * std::tanh(v_long / kSmoothingSpeed) +
                                    z.viscous * (p.mass / 4.0) * v_long;
      out.ground.lateral[i] += z.lateral_friction * load * std::tanh(v_lat / kSmoothingSpeed);
      out.ground.extra_moment +=
          z.moment_arm * z.friction * load * std::tanh(yaw_rate / kSmoothingSpeed);
    }
  }
  return out;
}

Vec3 true_disturbance_accel(const SampledDisturbance& d, const VehicleState& state,
                            const VehicleParams& p) {
  if (state.mode == Mode::Air) return -gravity_vector(p.gravity) - d.d_air / p.mass;
  const Vec3 world = rotate_yaw(d.ground.as_vector(), state.yaw());
  return {-world.x() / p.mass, -world.y() / p.mass, 0.0};
}

Vec3 attitude_torque(const VehicleState& state, const Vec3& attitude_des,
                     const TrackingGains& gains, const VehicleParams& p) {
  Vec3 err = attitude_des - state.attitude;
  err.z() = wrap_angle(err.z());
  const Vec3 alpha = gains.attitude_kp * err - gains.attitude_kd * state.angular_velocity;
  return p.inertia.cwiseProduct(alpha) + gyroscopic_term(state.angular_velocity, p.inertia);
}

AirCommand track_air(const Reference& ref, const VehicleState& state,
                     const std::optional<Vec3>& d1_hat, const TrackingGains& gains,
                     const VehicleParams& p, double yaw_target) {
  AirCommand out;
  out.accel = ref.acceleration + gains.air_kp * (ref.position - state.position) +
              gains.air_kd * (ref.velocity - state.velocity);
  const Vec3 d = d1_hat ? *d1_hat : Vec3(-gravity_vector(p.gravity));
  Vec3 f = p.mass * (out.accel - d);

  const Vec3 raw = f;
  f.x() = std::clamp(f.x(), -p.thrust_max.x(), p.thrust_max.x());
  f.y() = std::clamp(f.y(), -p.thrust_max.y(), p.thrust_max.y());
  f.z() = std::clamp(f.z(), 0.0, p.thrust_max.z());
  const double total = p.thrust_max.z();
  if (f.norm() > total) {
    const double room = std::sqrt(std::max(total * total - f.z() * f.z(), 0.0));
    const double h = f.head<2>().norm();
    if (h > 0.0) f.head<2>() *= room / h;
  }
  out.saturated = (f - raw).norm() > 1e-9;

  const double thrust = f.norm();
  out.input.thrust = thrust;
  if (thrust < 1e-9) {
    out.attitude = Vec3(0.0, 0.0, yaw_target);
  } else {
    const Vec3 fb = rotate_yaw(f, -yaw_target);
    const double roll = std::asin(std::clamp(-fb.y() / thrust, -1.0, 1.0));
    const double pitch = std::atan2(fb.x(), fb.z());
    out.attitude = Vec3(roll, pitch, yaw_target);
  }
  out.input.torque = attitude_torque(state, out.attitude, gains, p);
  return out;
}

LandCommand track_land(const Reference& ref, const VehicleState& state,
                       const std::optional<Vec3>& d2_hat, const TrackingGains& gains,
                       const VehicleParams& p) {
  LandCommand out;
  Vec3 a = ref.acceleration + gains.land_kp * (ref.position - state.position) +
           gains.land_kd * (ref.velocity - state.velocity);
  a.z() = 0.0;
  out.accel = a;
  Vec3 f = p.mass * a;
  if (d2_hat && gains.land_disturbance_compensation) f.head<2>() -= p.mass * d2_hat->head<2>();

  const double yaw = state.yaw();
  // Only the body axis can push, so the heading leans from the reference
  // tangent toward the desired force. The lean is continuous in the force and
  // the tangent is a line (forwards and backwards driving are equivalent).
  double base = yaw;
  if (ref.velocity.head<2>().norm() > 0.05) {
    base = std::atan2(ref.velocity.y(), ref.velocity.x());
    if (std::abs(wrap_angle(base - yaw)) > std::numbers::pi / 2) {
      base = wrap_angle(base + std::numbers::pi);
    }
  }
  const double f_along = f.x() * std::cos(base) + f.y() * std::sin(base);
  const double f_normal = -f.x() * std::sin(base) + f.y() * std::cos(base);
  const double lean = std::atan2(f_normal, std::abs(f_along) + p.mass * 1.0);
  const double target = wrap_angle(
      base + std::clamp(lean, -gains.max_heading_offset, gains.max_heading_offset));
  out.heading = target;

  const double longitudinal = f.x() * std::cos(yaw) + f.y() * std::sin(yaw);
  // Heading PD output is the right − left wheel force difference (N/rad).
  double diff =
      gains.heading_kp * wrap_angle(target - yaw) - gains.heading_kd * state.angular_velocity.z();

  const double fmax = p.wheel_force_max();
  const double diff_c = std::clamp(diff, -2.0 * fmax, 2.0 * fmax);
  const double room = fmax - std::abs(diff_c) / 2.0;
  const double common = std::clamp(longitudinal / 4.0, -room, room);
  out.saturated = diff_c != diff || std::abs(common - longitudinal / 4.0) > 1e-12;
  diff = diff_c;
  out.input.left = common - diff / 2.0;
  out.input.right = common + diff / 2.0;
  return out;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Replan: return "replan";
    case EventKind::ReplanFailed: return "replan_failed";
    case EventKind::DetourReplanned: return "detour_replanned";
    case EventKind::SwitchedToAir: return "switched_to_air";
    case EventKind::SwitchedToLand: return "switched_to_land";
    case EventKind::DecisionError: return "decision_error";
    case EventKind::EmergencyStop: return "emergency_stop";
    case EventKind::GoalReached: return "goal_reached";
    case EventKind::Timeout: return "timeout";
  }
  return "unknown";
}

Metrics compute_metrics(const SimLog& log, double k_torque_air, double k_torque_land) {
  Metrics m;
  if (log.rows.empty()) {
    m.empty = true;
    return m;
  }
  double joules = 0.0, sq = 0.0;
  for (const LogRow& r : log.rows) {
    const double k = r.mode == Mode::Air ? k_torque_air : k_torque_land;
    double power = 0.0;
    for (double rpm : r.rpm) power += motor_power(rpm, k);
    joules += power * log.dt;
    sq += (r.state.position - r.ref.position).squaredNorm();
  }
  m.energy = joules / 3600.0;
  m.rmse = std::sqrt(sq / static_cast<double>(log.rows.size()));
  m.task_time = log.rows.back().time - log.rows.front().time;
  return m;
}

namespace {

struct PlanStore {
  std::vector<Trajectory> items;
  int add(Trajectory t) {
    items.push_back(std::move(t));
    return static_cast<int>(items.size()) - 1;
  }
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg),
        p_(cfg.vehicle),
        esdf_(build_esdf(cfg.map.build_grid(), cfg.map.truncation)),
        fields_{cfg.wind_zones, cfg.resistance_zones},
        planner_(cfg.planner),
        observer_(cfg.observer.time_constant, cfg.start.mode),
        rng_(cfg.sim.seed),
        noise_(0.0, 1.0) {
    adaptive_ = cfg.variant == PlannerVariant::Adaptive;
    if (!adaptive_) {
      planner_.search.weight_altitude = 0.0;
      planner_.search.weight_direction = 0.0;
    }
    r_thr_ = planner_.search.altitude_threshold;
    substeps_ = static_cast<int>(std::lround(cfg.sim.dt_control / cfg.sim.dt_dynamics));
    replan_every_ = static_cast<int>(std::lround(1.0 / (cfg.sim.replan_hz * cfg.sim.dt_control)));
    knot_ = 0.5 * planner_.search.primitive_duration;

    state_.position = cfg.start.position;
    state_.velocity = cfg.start.velocity;
    state_.attitude = Vec3(0.0, 0.0, cfg.start.yaw);
    state_.mode = cfg.start.mode;
    if (state_.mode == Mode::Land) {
      state_.position.z() = 0.0;
      state_.velocity.z() = 0.0;
    }
    yaw_hold_ = cfg.start.yaw;
    reset_observer(0.0);
    log_.dt = cfg.sim.dt_control;
  }

  SimResult run() {
    const double dtc = cfg_.sim.dt_control;
    const long max_ticks = static_cast<long>(std::ceil(cfg_.sim.timeout / dtc));

    traj_ = hold_trajectory(state_.position, 0.0, knot_);
    if (!cfg_.sim.hold_position) regular_replan(0.0);

    bool success = false;
    bool stopped = false;
    Vec3 u0_mean = Vec3::Zero();
    for (long k = 0; k <= max_ticks; ++k) {
      const double t = k * dtc;
      state_.time = t;
      if (k > 0) {
        const Vec3 v_meas = measure_velocity();
        estimate_ = observer_.update(v_meas, u0_mean, dtc);
      }

      if ((state_.position - cfg_.goal).norm() <= cfg_.sim.goal_tolerance) {
        log_.events.push_back({t, EventKind::GoalReached, 0.0, false, false, {}, ""});
        append_row(t, current_reference(t), std::nullopt, Vec3::Zero(), false, Vec3::Zero());
        success = true;
        break;
      }
      if (k == max_ticks) {
        log_.events.push_back({t, EventKind::Timeout, 0.0, false, false, {}, ""});
        append_row(t, current_reference(t), std::nullopt, Vec3::Zero(), false, Vec3::Zero());
        break;
      }

      if (!cfg_.sim.hold_position && k > 0 && k % replan_every_ == 0) {
        if (needs_replan(t)) regular_replan(t);
        if (consecutive_failures_ >= cfg_.sim.max_consecutive_failures) {
          log_.events.push_back({t, EventKind::EmergencyStop, 0.0, false, false, {},
                                 "planner failed repeatedly"});
          stopped = true;
        }
        if (!stopped && adaptive_) mode_decision(t);
      }

      const Reference ref = current_reference(t);
      ControlInput input;
      Vec3 accel_cmd = Vec3::Zero();
      bool saturated = false;
      Vec3 attitude_des = Vec3::Zero();
      if (state_.mode == Mode::Air) {
        std::optional<Vec3> d1;
        if (observer_.mode() == Mode::Air) d1 = estimate_.value;
        AirCommand cmd = track_air(ref, state_, d1, cfg_.tracking, p_, yaw_hold_);
        if (stopped) {
          cmd.input.thrust = p_.mass * p_.gravity;
          cmd.attitude = Vec3(0.0, 0.0, yaw_hold_);
        }
        input = cmd.input;
        accel_cmd = cmd.accel;
        saturated = cmd.saturated;
        attitude_des = cmd.attitude;
      } else {
        std::optional<Vec3> d2;
        if (observer_.mode() == Mode::Land) d2 = estimate_.value;
        LandCommand cmd = track_land(ref, state_, d2, cfg_.tracking, p_);
        if (stopped) cmd.input = LandInput{};
        input = cmd.input;
        accel_cmd = cmd.accel;
        saturated = cmd.saturated;
      }

      const Vec3 v_before = state_.velocity;
      const VehicleState logged = state_;
      const Vec3 d_true = true_disturbance_accel(sample_disturbance(fields_, state_, p_), state_, p_);
      u0_mean = integrate(input, attitude_des);
      const Vec3 accel_meas = (state_.velocity - v_before) / dtc;
      append_row(t, ref, input, accel_cmd, saturated, accel_meas, &logged, d_true);
      if (stopped) break;
    }

    SimResult result;
    std::vector<double> sorted = log_.cycle_ms;
    if (!sorted.empty()) {
      std::sort(sorted.begin(), sorted.end());
      log_.cycle_ms_median = sorted[sorted.size() / 2];
    }
    result.log = std::move(log_);
    result.metrics = compute_metrics(result.log, p_.k_torque_air, p_.k_torque_land);
    result.metrics.success = success;
    return result;
  }

 private:
  Vec3 measure_velocity() {
    Vec3 v = state_.velocity;
    const double sigma = cfg_.observer.velocity_noise;
    if (sigma > 0.0) {
      for (int i = 0; i < 3; ++i) v[i] += sigma * noise_(rng_);
    }
    if (state_.mode == Mode::Land) v.z() = 0.0;
    return v;
  }

  void reset_observer(double t) {
    const Vec3 prior = state_.mode == Mode::Air ? Vec3(-gravity_vector(p_.gravity)) : Vec3::Zero();
    observer_.reset(state_.mode, prior, t);
    observer_.prime(measure_velocity(), t);
    estimate_ = observer_.snapshot();
  }

  // Steps the dynamics through one control interval; returns the mean nominal input.
  Vec3 integrate(const ControlInput& input, const Vec3& attitude_des) {
    Vec3 u0_sum = Vec3::Zero();
    const double dt = cfg_.sim.dt_dynamics;
    for (int s = 0; s < substeps_; ++s) {
      ControlInput applied = input;
      if (state_.mode == Mode::Air) {
        auto& air = std::get<FlightInput>(applied);
        air.torque = attitude_torque(state_, attitude_des, cfg_.tracking, p_);
        u0_sum += nominal_input_air(air.thrust, state_.attitude, p_);
      } else {
        u0_sum += nominal_input_land(std::get<LandInput>(applied), state_.yaw(), p_, state_.velocity);
      }
      const SampledDisturbance dist = sample_disturbance(fields_, state_, p_);
      Disturbances d;
      d.d_air = dist.d_air;
      d.ground = dist.ground;
      state_ = step(state_, applied, d, dt, p_);
      if (state_.mode == Mode::Air && state_.position.z() < 0.0) {
        state_.position.z() = 0.0;
        state_.velocity.z() = std::max(state_.velocity.z(), 0.0);
      }
    }
    return u0_sum / substeps_;
  }

  Reference current_reference(double t) const {
    Reference r;
    if (t >= traj_.end_time()) {
      r.position = traj_.at(traj_.end_time()).position;
      return r;
    }
    const auto s = traj_.at(t);
    r.position = s.position;
    r.velocity = s.velocity;
    r.acceleration = s.acceleration;
    return r;
  }

  Vec3 air_estimate_for_planning() const {
    if (adaptive_ && observer_.mode() == Mode::Air && estimate_.age >= cfg_.switching.settle_time) {
      return estimate_.value;
    }
    return -gravity_vector(p_.gravity);
  }

  Vec3 land_estimate_for_planning() const {
    if (adaptive_ && observer_.mode() == Mode::Land) return estimate_.value;
    return Vec3::Zero();
  }

  BoundsPair planning_bounds() const {
    if (!adaptive_) return nominal_bounds(p_);
    return {air_bounds(air_estimate_for_planning(), p_), land_bounds(land_estimate_for_planning(), p_)};
  }

  // Start state for a replan: the reference unless tracking has drifted.
  PlanRequest base_request(double t) const {
    PlanRequest req;
    const Reference ref = current_reference(t);
    if ((ref.position - state_.position).norm() > cfg_.sim.replan_error_threshold) {
      req.position = state_.position;
      req.velocity = state_.velocity;
      req.acceleration = Vec3::Zero();
    } else {
      req.position = ref.position;
      req.velocity = ref.velocity;
      req.acceleration = ref.acceleration;
    }
    if (state_.mode == Mode::Land) {
      req.position.z() = 0.0;
      req.velocity.z() = 0.0;
      req.acceleration.z() = 0.0;
    }
    req.goal = cfg_.goal;
    req.policy = SearchPolicy::for_mode(state_.mode);
    return req;
  }

  void adopt(const UniformBSpline& spline, double t) { adopt(Trajectory{spline, t}, t); }
  void adopt(const Trajectory& traj, double t) {
    traj_ = traj;
    last_plan_time_ = t;
    last_bounds_ = planning_bounds();
  }

  // The current plan is kept until it goes stale, collides, drifts from the
  // vehicle or was made under bounds the estimate has since moved away from.
  bool needs_replan(double t) const {
    if (consecutive_failures_ > 0) return true;
    if (t - last_plan_time_ >= cfg_.sim.replan_period - 1e-9) return true;
    if (t >= traj_.end_time()) return true;
    if ((current_reference(t).position - state_.position).norm() > cfg_.sim.replan_error_threshold) {
      return true;
    }
    if (adaptive_) {
      const BoundsPair now = planning_bounds();
      const double shift = std::max(
          {(now.air.min - last_bounds_.air.min).cwiseAbs().maxCoeff(),
           (now.air.max - last_bounds_.air.max).cwiseAbs().maxCoeff(),
           (now.land.min - last_bounds_.land.min).cwiseAbs().maxCoeff(),
           (now.land.max - last_bounds_.land.max).cwiseAbs().maxCoeff()});
      if (shift > cfg_.sim.bounds_change_threshold) return true;
    }
    const double margin = 0.5 * planner_.search.clearance;
    for (double s = t; s <= traj_.end_time(); s += 0.1) {
      const auto q = esdf_.query(traj_.at(s).position);
      if (!q.out_of_bounds && q.distance < margin) return true;
    }
    return false;
  }

  void regular_replan(double t) {
    PlanRequest req = base_request(t);
    BoundsPair bounds = planning_bounds();
    if (detour_active_) {
      if (waypoint_passed()) {
        detour_active_ = false;
      } else {
        req.waypoint = detour_waypoint_;
        bounds.land = land_bounds(Vec3::Zero(), p_);
      }
    }
    const PlanOutcome out = plan_trajectory(req, esdf_, bounds, planner_);
    log_.cycle_ms.push_back(out.search_ms + out.optimize_ms);
    if (out.ok()) {
      adopt(*out.spline, t);
      consecutive_failures_ = 0;
      log_.events.push_back({t, EventKind::Replan, 0.0, false, false, {},
                             std::string(to_string(out.search.status))});
    } else {
      ++consecutive_failures_;
      log_.events.push_back({t, EventKind::ReplanFailed, 0.0, false, false, {},
                             std::string(to_string(out.search.status))});
    }
  }

  bool waypoint_passed() const {
    const Vec3 dir = line_direction();
    const Vec3 rel = state_.position - detour_waypoint_;
    return rel.head<2>().norm() < 0.5 || rel.head<2>().dot(dir.head<2>()) > 0.0;
  }

  Vec3 line_direction() const {
    Vec3 d = cfg_.goal - cfg_.start.position;
    d.z() = 0.0;
    if (d.norm() < 1e-9) return Vec3::UnitX();
    return d.normalized();
  }

  double predicted_exposure(const Trajectory& traj, double t) const {
    double sum = 0.0;
    int n = 0;
    for (double s = t; s <= traj.end_time() + 1e-9; s += cfg_.switching.horizon_spacing) {
      const auto smp = traj.at(s);
      VehicleState probe;
      probe.mode = Mode::Land;
      probe.position = smp.position;
      probe.velocity = smp.velocity;
      probe.attitude.z() = smp.velocity.head<2>().norm() > 1e-6
                               ? std::atan2(smp.velocity.y(), smp.velocity.x())
                               : state_.yaw();
      sum += true_disturbance_accel(sample_disturbance(fields_, probe, p_), probe, p_).norm();
      ++n;
    }
    return n ? sum / n : 0.0;
  }

  void mode_decision(double t) {
    if (t - last_switch_time_ < cfg_.switching.dwell_time) return;
    if (state_.mode == Mode::Land && detour_active_) return;
    const SwitchConfig& sc = cfg_.switching;
    PlanStore store;
    const BoundsPair bounds = planning_bounds();

    DetourPlanner detour = [&](int side) -> std::optional<PlanCandidate> {
      const Vec3 dir = line_direction();
      const Vec3 perp(-dir.y(), dir.x(), 0.0);
      const Vec3 along = cfg_.start.position +
                         dir * (state_.position - cfg_.start.position).dot(dir);
      Vec3 wp = along + sc.detour_lookahead * dir + side * sc.detour_offset * perp;
      wp.z() = 0.0;
      PlanRequest req = base_request(t);
      req.policy = SearchPolicy{Mode::Land, false, false};
      req.waypoint = wp;
      BoundsPair b = bounds;
      b.land = land_bounds(Vec3::Zero(), p_);
      const PlanOutcome out = plan_trajectory(req, esdf_, b, planner_);
      if (!out.ok()) return std::nullopt;
      Trajectory traj{*out.spline, t};
      PlanCandidate c;
      c.horizon = traj.horizon(t, sc.horizon, sc.horizon_spacing);
      c.exposure = predicted_exposure(traj, t);
      c.plan_id = store.add(traj);
      detour_candidates_.emplace_back(c.plan_id, wp);
      return c;
    };

    VerticalPlanner vertical = [&]() -> std::optional<PlanCandidate> {
      PlanRequest req = base_request(t);
      BoundsPair b = bounds;
      if (state_.mode == Mode::Land) {
        req.policy = SearchPolicy{Mode::Land, true, false};
        b.air = air_bounds(-gravity_vector(p_.gravity), p_);
      } else {
        req.policy = SearchPolicy{Mode::Air, true, true};
        b = descent_bounds(bounds, planner_.descent_extra);
        req.altitude_weight = planner_.descent_altitude_weight;
      }
      const PlanOutcome out = plan_trajectory(req, esdf_, b, planner_);
      if (!out.ok()) return std::nullopt;
      Trajectory traj{*out.spline, t};
      PlanCandidate c;
      double start = t;
      if (state_.mode == Mode::Land) {
        // The ∀ check applies once the takeoff has cleared the threshold.
        for (double s = t; s <= t + kTakeoffWindow + 1e-9; s += sc.horizon_spacing) {
          if (traj.at(s).position.z() > r_thr_) {
            start = s - sc.horizon_spacing;
            break;
          }
        }
      }
      c.horizon = traj.horizon(start, sc.horizon, sc.horizon_spacing);
      c.plan_id = store.add(traj);
      return c;
    };

    detour_candidates_.clear();
    const std::vector<Vec3> horizon = traj_.horizon(t, sc.horizon, sc.horizon_spacing);
    const double air_age = observer_.mode() == Mode::Air ? estimate_.age
                                                         : std::numeric_limits<double>::infinity();
    const Vec3 d1 = state_.mode == Mode::Air ? estimate_.value : Vec3(-gravity_vector(p_.gravity));
    const Vec3 d2 = state_.mode == Mode::Land ? estimate_.value : Vec3::Zero();
    const ModeDecision dec =
        decide(state_.mode, d1, d2, horizon, sc, detour, vertical, air_age, p_.gravity);

    if (!dec.error.empty()) {
      log_.events.push_back({t, EventKind::DecisionError, dec.triggering_magnitude,
                             dec.detour_attempted, dec.detour_found, {}, dec.error});
      return;
    }
    const Trajectory* adopted =
        dec.adopted && dec.adopted->plan_id >= 0 ? &store.items[dec.adopted->plan_id] : nullptr;
    switch (dec.action) {
      case SwitchAction::None:
        if (adopted && state_.mode == Mode::Air) {
          adopt(*adopted, t);
          log_.events.push_back({t, EventKind::Replan, dec.triggering_magnitude, false, false, {},
                                 "downward"});
        }
        break;
      case SwitchAction::DetourReplanned:
        if (adopted) {
          adopt(*adopted, t);
          for (const auto& [id, wp] : detour_candidates_) {
            if (id == dec.adopted->plan_id) detour_waypoint_ = wp;
          }
          detour_active_ = true;
        }
        log_.events.push_back({t, EventKind::DetourReplanned, dec.triggering_magnitude, true, true,
                               dec.adopted ? dec.adopted->horizon : std::vector<Vec3>{}, ""});
        break;
      case SwitchAction::SwitchedToAir:
        if (adopted) adopt(*adopted, t);
        log_.events.push_back({t, EventKind::SwitchedToAir, dec.triggering_magnitude,
                               dec.detour_attempted, dec.detour_found, dec.adopted->horizon, ""});
        state_.mode = Mode::Air;
        yaw_hold_ = state_.yaw();
        last_switch_time_ = t;
        detour_active_ = false;
        reset_observer(t);
        break;
      case SwitchAction::SwitchedToLand: {
        log_.events.push_back({t, EventKind::SwitchedToLand, dec.triggering_magnitude, false,
                               false, dec.adopted->horizon, ""});
        state_.mode = Mode::Land;
        state_.position.z() = 0.0;
        state_.velocity.z() = 0.0;
        state_.attitude.x() = 0.0;
        state_.attitude.y() = 0.0;
        state_.angular_velocity.x() = 0.0;
        state_.angular_velocity.y() = 0.0;
        last_switch_time_ = t;
        reset_observer(t);
        if (adopted) adopt(*adopted, t);
        regular_replan(t);
        break;
      }
    }
  }

  void append_row(double t, const Reference& ref, const std::optional<ControlInput>& input,
                  const Vec3& accel_cmd, bool saturated, const Vec3& accel_meas,
                  const VehicleState* logged = nullptr, const Vec3& d_true = Vec3::Zero()) {
    LogRow row;
    row.time = t;
    row.state = logged ? *logged : state_;
    row.mode = row.state.mode;
    row.ref = ref;
    row.accel_cmd = accel_cmd;
    row.accel_meas = accel_meas;
    row.d_hat = estimate_.value;
    row.d_true = logged ? d_true
                        : true_disturbance_accel(sample_disturbance(fields_, state_, p_), state_, p_);
    const BoundsPair b = planning_bounds();
    row.bounds = row.mode == Mode::Air ? b.air : b.land;
    row.saturated = saturated;
    if (input) {
      row.rpm = motor_rpms(*input, p_);
      if (const auto* air = std::get_if<FlightInput>(&*input)) {
        row.thrust = air->thrust;
      } else {
        const auto& land = std::get<LandInput>(*input);
        row.wheel_left = land.left;
        row.wheel_right = land.right;
      }
    }
    log_.rows.push_back(row);
  }

  const ScenarioConfig& cfg_;
  VehicleParams p_;
  Esdf esdf_;
  DisturbanceFields fields_;
  PlannerConfig planner_;
  UdeEstimator observer_;
  DisturbanceEstimate estimate_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
  bool adaptive_ = true;
  double r_thr_ = 0.3;
  int substeps_ = 5;
  int replan_every_ = 10;
  double knot_ = 0.2;

  VehicleState state_;
  double yaw_hold_ = 0.0;
  Trajectory traj_;
  BoundsPair last_bounds_;
  double last_plan_time_ = -1e9;
  int consecutive_failures_ = 0;
  double last_switch_time_ = -1e9;
  bool detour_active_ = false;
  Vec3 detour_waypoint_ = Vec3::Zero();
  std::vector<std::pair<int, Vec3>> detour_candidates_;
  SimLog log_;
};

void put(std::ostream& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

void put_vec(std::ostream& out, const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    out << ',';
    put(out, v[i]);
  }
}

}  // namespace

SimResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Simulation sim(cfg);
  return sim.run();
}

void write_log_csv(const SimLog& log, std::ostream& out) {
  out << "time,mode,px,py,pz,vx,vy,vz,roll,pitch,yaw,ref_px,ref_py,ref_pz,ref_vx,ref_vy,ref_vz,"
         "ref_ax,ref_ay,ref_az,cmd_ax,cmd_ay,cmd_az,meas_ax,meas_ay,meas_az,dhat_x,dhat_y,dhat_z,"
         "dtrue_x,dtrue_y,dtrue_z,amin_x,amin_y,amin_z,amax_x,amax_y,amax_z,thrust,wheel_left,"
         "wheel_right,rpm1,rpm2,rpm3,rpm4,saturated\n";
  for (const LogRow& r : log.rows) {
    put(out, r.time);
    out << ',' << to_string(r.mode);
    put_vec(out, r.state.position);
    put_vec(out, r.state.velocity);
    put_vec(out, r.state.attitude);
    put_vec(out, r.ref.position);
    put_vec(out, r.ref.velocity);
    put_vec(out, r.ref.acceleration);
    put_vec(out, r.accel_cmd);
    put_vec(out, r.accel_meas);
    put_vec(out, r.d_hat);
    put_vec(out, r.d_true);
    put_vec(out, r.bounds.min);
    put_vec(out, r.bounds.max);
    for (double v : {r.thrust, r.wheel_left, r.wheel_right, r.rpm[0], r.rpm[1], r.rpm[2], r.rpm[3]}) {
      out << ',';
      put(out, v);
    }
    out << ',' << (r.saturated ? 1 : 0) << '\n';
  }
}

void write_events_csv(const SimLog& log, std::ostream& out) {
  out << "time,event,magnitude,detour_attempted,detour_found,horizon_min_z,horizon_max_z,detail\n";
  for (const SimEvent& e : log.events) {
    put(out, e.time);
    out << ',' << to_string(e.kind) << ',';
    put(out, e.magnitude);
    out << ',' << (e.detour_attempted ? 1 : 0) << ',' << (e.detour_found ? 1 : 0) << ',';
    if (e.horizon.empty()) {
      out << ",";
    } else {
      double lo = e.horizon[0].z(), hi = lo;
      for (const Vec3& p : e.horizon) {
        lo = std::min(lo, p.z());
        hi = std::max(hi, p.z());
      }
      put(out, lo);
      out << ',';
      put(out, hi);
    }
    out << ',' << e.detail << '\n';
  }
}

std::string metrics_json(const Metrics& m) {
  std::ostringstream os;
  os << "{\"time_s\":";
  put(os, m.task_time);
  os << ",\"energy_wh\":";
  put(os, m.energy);
  os << ",\"rmse_m\":";
  put(os, m.rmse);
  os << ",\"success\":" << (m.success ? "true" : "false") << "}";
  return os.str();
}

}  // namespace bimodal
