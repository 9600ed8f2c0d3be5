#include "bimodal/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace bimodal {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SearchConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("search.epsilon must be positive");
  if (!(altitude_threshold > 0.0)) throw InvalidArgument("search.altitude_threshold must be positive");
  if (samples_per_axis < 3 || samples_per_axis % 2 == 0) {
    throw InvalidArgument("search.samples_per_axis must be odd and >= 3");
  }
  if (!(primitive_duration > 0.0)) throw InvalidArgument("search.primitive_duration must be positive");
  if (!(position_resolution > 0.0)) throw InvalidArgument("search.position_resolution must be positive");
  if (!(velocity_bin > 0.0)) throw InvalidArgument("search.velocity_bin must be positive");
  if (!(max_speed > 0.0)) throw InvalidArgument("search.max_speed must be positive");
  if (!(heuristic_weight >= 1.0)) throw InvalidArgument("search.heuristic_weight must be >= 1");
  if (weight_altitude < 0.0 || weight_direction < 0.0 || time_weight < 0.0) {
    throw InvalidArgument("search weights must be non-negative");
  }
  if (!(goal_tolerance > 0.0)) throw InvalidArgument("search.goal_tolerance must be positive");
  if (clearance < 0.0) throw InvalidArgument("search.clearance must be non-negative");
  if (max_expansions <= 0) throw InvalidArgument("search.max_expansions must be positive");
}

std::string_view to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Success: return "success";
    case SearchStatus::NoPathFound: return "no_path_found";
    case SearchStatus::StartInCollision: return "start_in_collision";
    case SearchStatus::GoalInCollision: return "goal_in_collision";
  }
  return "unknown";
}

double SearchResult::duration() const {
  double t = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) t += path[i].primitive.duration;
  return t;
}

double altitude_penalty(double altitude, double altitude_threshold) {
  if (altitude <= altitude_threshold) return 0.0;
  const double e = altitude - altitude_threshold;
  return e * e;
}

double bounds_margin(const Vec3& a, const AccelBounds& b) {
  double c = 0.0;
  for (int i = 0; i < 3; ++i) c += std::min(a[i] - b.min[i], b.max[i] - a[i]);
  return c;
}

std::optional<double> directional_penalty(const Vec3& accel, const BoundsPair& bounds,
                                          double altitude, const SearchConfig& cfg) {
  const AccelBounds& b = bounds.for_altitude(altitude, cfg.altitude_threshold);
  if (!b.contains(accel, 1e-9)) return std::nullopt;
  const double c = std::max(bounds_margin(accel, b), 0.0);
  return 1.0 / (cfg.epsilon + c);
}

double min_time_1d(double x, double v, double target, double tolerance, double a_min,
                   double a_max, double v_max) {
  const double delta = target - x;
  const double dist = std::abs(delta) - tolerance;
  if (dist <= 0.0) return 0.0;
  const double s = delta > 0.0 ? 1.0 : -1.0;
  const double vf = s * v;
  const double hi = s > 0.0 ? a_max : -a_min;
  if (hi > 0.0) {
    if (vf >= v_max) return dist / vf;
    const double t1 = (v_max - vf) / hi;
    const double d1 = vf * t1 + 0.5 * hi * t1 * t1;
    if (dist <= d1) return (-vf + std::sqrt(vf * vf + 2.0 * hi * dist)) / hi;
    return t1 + (dist - d1) / v_max;
  }
  if (hi == 0.0) return vf > 0.0 ? dist / vf : kInf;
  if (vf <= 0.0) return kInf;
  const double brake = -hi;
  const double reach = vf * vf / (2.0 * brake);
  if (dist > reach) return kInf;
  return (vf - std::sqrt(std::max(vf * vf - 2.0 * brake * dist, 0.0))) / brake;
}

double baseline_heuristic(const Vec3& position, const Vec3& velocity, const Vec3& goal,
                          const AccelBounds& bounds, const SearchConfig& cfg) {
  // Each axis needs |Δ| ≤ tolerance at the goal, so tolerance is a per-axis
  // relaxation of the goal ball.
  double t = 0.0;
  for (int i = 0; i < 3; ++i) {
    t = std::max(t, min_time_1d(position[i], velocity[i], goal[i], cfg.goal_tolerance,
                                bounds.min[i], bounds.max[i], cfg.max_speed));
  }
  return cfg.time_weight * t;
}

double heuristic(const Vec3& position, const Vec3& velocity, const std::optional<Vec3>& incoming,
                 const Vec3& goal, const BoundsPair& bounds, const SearchConfig& cfg) {
  const AccelBounds& b = bounds.for_altitude(position.z(), cfg.altitude_threshold);
  double h = cfg.heuristic_weight * baseline_heuristic(position, velocity, goal, b, cfg);
  h += cfg.weight_altitude * altitude_penalty(position.z(), cfg.altitude_threshold);
  if (incoming && cfg.weight_direction > 0.0) {
    if (auto fd = directional_penalty(*incoming, bounds, position.z(), cfg)) {
      h += cfg.weight_direction * *fd;
    }
  }
  return h;
}

std::vector<Vec3> primitive_accels(const AccelBounds& bounds, const SearchConfig& cfg,
                                   const std::optional<Vec3>& velocity) {
  std::array<std::vector<double>, 3> axis;
  for (int i = 0; i < 3; ++i) {
    double lo = bounds.min[i], hi = bounds.max[i];
    if (velocity && cfg.velocity_window && hi - lo > 1e-12) {
      // Keep only accelerations that leave |v_i| within the cap after one primitive.
      const double v = (*velocity)[i];
      const double cap = std::max(cfg.max_speed, std::abs(v));
      lo = std::max(lo, (-cap - v) / cfg.primitive_duration);
      hi = std::min(hi, (cap - v) / cfg.primitive_duration);
      if (lo > hi + 1e-12) return {};
    }
    if (hi - lo <= 1e-12) {
      axis[i].push_back(lo);
      continue;
    }
    const int n = cfg.samples_per_axis;
    for (int k = 0; k < n; ++k) axis[i].push_back(lo + (hi - lo) * k / (n - 1));
    if (cfg.include_zero_accel && lo < 0.0 && hi > 0.0) {
      bool present = false;
      for (double a : axis[i]) present = present || std::abs(a) < 1e-12;
      if (!present) {
        axis[i].push_back(0.0);
        std::sort(axis[i].begin(), axis[i].end());
      }
    }
  }
  std::vector<Vec3> out;
  out.reserve(axis[0].size() * axis[1].size() * axis[2].size());
  for (double ax : axis[0])
    for (double ay : axis[1])
      for (double az : axis[2]) out.emplace_back(ax, ay, az);
  return out;
}

namespace {

struct StateKey {
  std::int64_t px, py, pz, vx, vy, vz;
  bool grounded;
  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.px, k.py, k.pz, k.vx, k.vy, k.vz, static_cast<std::int64_t>(k.grounded)}) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct Node {
  Vec3 position;
  Vec3 velocity;
  double g = 0.0;
  double h = 0.0;
  int parent = -1;
  MotionPrimitive primitive;
  bool grounded = true;
  bool closed = false;
};

struct OpenEntry {
  double f;
  double h;
  std::array<double, 6> state;
  std::uint64_t order;
  int node;
};

struct OpenCompare {
  // priority_queue pops the largest; invert so the smallest f (then h, then
  // state, then insertion order) comes first
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    return std::tie(a.f, a.h, a.state, a.order) > std::tie(b.f, b.h, b.state, b.order);
  }
};

class Searcher {
 public:
  Searcher(const Vec3& goal, const Esdf& map, const BoundsPair& bounds, const SearchConfig& cfg,
           const SearchPolicy& policy, const ExpansionHook& hook)
      : goal_(goal), map_(map), bounds_(bounds), cfg_(cfg), policy_(policy), hook_(hook) {
    const auto& grid = map_.grid();
    lo_ = grid.origin();
    hi_ = grid.upper_corner();
    const double max_travel = std::sqrt(3.0) * cfg_.max_speed * cfg_.primitive_duration;
    checks_per_primitive_ =
        std::max(2, static_cast<int>(std::ceil(max_travel / (0.5 * grid.resolution()))));
    // Heuristic relaxation: the widest interval any reachable mode offers.
    air_or_land_ = bounds_.air;
    for (int i = 0; i < 3; ++i) {
      air_or_land_.min[i] = std::min(bounds_.air.min[i], bounds_.land.min[i]);
      air_or_land_.max[i] = std::max(bounds_.air.max[i], bounds_.land.max[i]);
    }
  }

  SearchResult run(const Vec3& start_in, const Vec3& start_vel) {
    SearchResult result;
    const bool start_grounded = start_in.z() <= cfg_.altitude_threshold;
    // A reference that undershoots the floor slightly is still on the ground.
    Vec3 start_pos = start_in;
    if (start_grounded) start_pos.z() = std::max(start_pos.z(), 0.0);
    clearance_ = cfg_.clearance;
    if (!point_free(start_pos)) {
      // Inside the margin but not inside an obstacle: shrink the margin so the
      // vehicle can plan its way out.
      const bool in_map = (start_pos.array() >= lo_.array()).all() &&
                          (start_pos.array() <= hi_.array()).all();
      const double d = in_map ? map_.distance(start_pos) : 0.0;
      if (d <= 0.0) {
        result.status = SearchStatus::StartInCollision;
        return result;
      }
      clearance_ = 0.5 * d;
    }
    if (!point_free(goal_)) {
      result.status = SearchStatus::GoalInCollision;
      return result;
    }

    Node root;
    root.position = start_pos;
    root.velocity = start_vel;
    if (start_grounded) {
      root.position.z() = 0.0;
      root.velocity.z() = 0.0;
    }
    root.grounded = start_grounded;
    root.h = node_heuristic(root, std::nullopt);
    nodes_.push_back(root);
    push(0);

    while (!open_.empty()) {
      const OpenEntry top = open_.top();
      open_.pop();
      Node& n = nodes_[top.node];
      if (n.closed) continue;
      const StateKey key = key_of(n);
      auto it = closed_.find(key);
      if (it != closed_.end()) continue;  // first-closed wins
      n.closed = true;
      closed_.emplace(key, top.node);

      if ((n.position - goal_).norm() <= cfg_.goal_tolerance) {
        result.status = SearchStatus::Success;
        result.cost = n.g;
        result.path = extract(top.node);
        result.expansions = expansions_;
        result.bounds_violations = violations_;
        return result;
      }
      if (expansions_ >= cfg_.max_expansions) break;
      ++expansions_;
      expand(top.node);
    }
    result.status = SearchStatus::NoPathFound;
    result.expansions = expansions_;
    result.bounds_violations = violations_;
    return result;
  }

 private:
  bool point_free(const Vec3& p) const {
    if ((p.array() < lo_.array()).any() || (p.array() > hi_.array()).any()) return false;
    return map_.distance(p) >= clearance_;
  }

  StateKey key_of(const Node& n) const {
    const double r = cfg_.position_resolution;
    const double vb = cfg_.velocity_bin;
    const Vec3 rel = (n.position - lo_) / r;
    return {static_cast<std::int64_t>(std::floor(rel.x())),
            static_cast<std::int64_t>(std::floor(rel.y())),
            static_cast<std::int64_t>(std::floor(rel.z())),
            static_cast<std::int64_t>(std::llround(n.velocity.x() / vb)),
            static_cast<std::int64_t>(std::llround(n.velocity.y() / vb)),
            static_cast<std::int64_t>(std::llround(n.velocity.z() / vb)),
            n.grounded};
  }

  double node_heuristic(const Node& n, const std::optional<Vec3>& incoming) const {
    const AccelBounds* relax = &bounds_.for_altitude(n.position.z(), cfg_.altitude_threshold);
    const bool can_fly = n.grounded ? takeoff_allowed() : true;
    const bool can_land = n.grounded ? land_allowed() : policy_.allow_landing;
    if (can_fly && can_land) relax = &air_or_land_;
    double h = cfg_.heuristic_weight * baseline_heuristic(n.position, n.velocity, goal_, *relax, cfg_);
    if (!std::isfinite(h)) return h;
    h += cfg_.weight_altitude * altitude_penalty(n.position.z(), cfg_.altitude_threshold);
    if (incoming && cfg_.weight_direction > 0.0) {
      if (auto fd = directional_penalty(*incoming, bounds_, n.position.z(), cfg_)) {
        h += cfg_.weight_direction * *fd;
      }
    }
    return h;
  }

  bool takeoff_allowed() const { return policy_.mode == Mode::Air || policy_.allow_takeoff; }
  bool land_allowed() const { return policy_.mode == Mode::Land || policy_.allow_landing; }

  void push(int idx) {
    const Node& n = nodes_[idx];
    OpenEntry e{n.g + n.h,
                n.h,
                {n.position.x(), n.position.y(), n.position.z(), n.velocity.x(), n.velocity.y(),
                 n.velocity.z()},
                order_++,
                idx};
    open_.push(e);
  }

  // Checks the swept primitive; `touchdown` allows the end to sit in the ground band.
  bool primitive_free(const Node& from, const Vec3& a, double tau, bool airborne_segment) const {
    for (int k = 1; k <= checks_per_primitive_; ++k) {
      const double t = tau * k / checks_per_primitive_;
      Vec3 p, v;
      propagate(from.position, from.velocity, a, t, p, v);
      if (airborne_segment && p.z() < 0.0) return false;
      if (!point_free(p)) return false;
    }
    return true;
  }

  void expand(int idx) {
    const Node parent = nodes_[idx];
    const double tau = cfg_.primitive_duration;
    if (parent.grounded) {
      if (land_allowed()) {
        for (const Vec3& a : primitive_accels(bounds_.land, cfg_, parent.velocity)) {
          try_child(idx, parent, a, tau, bounds_.land, false);
        }
      }
      if (takeoff_allowed()) {
        for (const Vec3& a : primitive_accels(bounds_.air, cfg_, parent.velocity)) {
          try_child(idx, parent, a, tau, bounds_.air, true);
        }
      }
    } else {
      for (const Vec3& a : primitive_accels(bounds_.air, cfg_, parent.velocity)) {
        try_child(idx, parent, a, tau, bounds_.air, true);
      }
    }
  }

  void try_child(int parent_idx, const Node& parent, const Vec3& a, double tau,
                 const AccelBounds& family_bounds, bool air_family) {
    if (!family_bounds.contains(a, 1e-9)) ++violations_;
    if (hook_) {
      PathNode pn;
      pn.position = parent.position;
      pn.velocity = parent.velocity;
      pn.mode_tag = parent.grounded ? Mode::Land : Mode::Air;
      hook_(pn, MotionPrimitive{a, tau}, family_bounds);
    }
    Node child;
    propagate(parent.position, parent.velocity, a, tau, child.position, child.velocity);
    const double r_thr = cfg_.altitude_threshold;

    if (!air_family) {
      child.position.z() = 0.0;
      child.velocity.z() = 0.0;
      child.grounded = true;
    } else if (child.position.z() > r_thr) {
      child.grounded = false;
      if (parent.grounded && !takeoff_allowed()) return;
    } else {
      // Entering the ground band from the air or a hop that never clears it.
      if (parent.grounded) return;
      const bool near_goal =
          (child.position.head<2>() - goal_.head<2>()).norm() <= cfg_.goal_tolerance &&
          goal_.z() <= r_thr;
      if (!policy_.allow_landing && !near_goal) return;
      if (std::abs(child.velocity.z()) > cfg_.touchdown_speed) return;
      // The wheels take over at touchdown, so the planar part must already be drivable.
      if (!bounds_.land.contains(Vec3(a.x(), a.y(), 0.0), 1e-9)) return;
      child.position.z() = 0.0;
      child.velocity.z() = 0.0;
      child.grounded = true;
    }

    // Per-axis cap, matching the sampling window. A start state already past
    // the cap may keep (not grow) its speed on that axis.
    for (int i = 0; i < 3; ++i) {
      const double cap = std::max(cfg_.max_speed, std::abs(parent.velocity[i]));
      if (std::abs(child.velocity[i]) > cap + 1e-9) return;
    }
    if (!primitive_free(parent, a, tau, air_family)) return;
    if (!point_free(child.position)) return;

    child.g = parent.g + (a.squaredNorm() + cfg_.time_weight) * tau;
    child.h = node_heuristic(child, a);
    if (!std::isfinite(child.h)) return;
    child.parent = parent_idx;
    child.primitive = {a, tau};

    const StateKey key = key_of(child);
    if (closed_.count(key)) return;
    auto it = best_open_.find(key);
    if (it != best_open_.end() && nodes_[it->second].g <= child.g) return;
    nodes_.push_back(child);
    const int idx = static_cast<int>(nodes_.size()) - 1;
    if (it != best_open_.end()) {
      nodes_[it->second].closed = true;  // superseded
      it->second = idx;
    } else {
      best_open_.emplace(key, idx);
    }
    push(idx);
  }

  std::vector<PathNode> extract(int idx) const {
    std::vector<int> chain;
    for (int i = idx; i >= 0; i = nodes_[i].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    std::vector<PathNode> path;
    path.reserve(chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const Node& n = nodes_[chain[k]];
      PathNode pn;
      pn.position = n.position;
      pn.velocity = n.velocity;
      pn.g_cost = n.g;
      pn.h_cost = n.h;
      pn.parent = static_cast<int>(k) - 1;
      pn.primitive = n.primitive;
      pn.mode_tag = n.grounded ? Mode::Land : Mode::Air;
      path.push_back(pn);
    }
    return path;
  }

  Vec3 goal_;
  const Esdf& map_;
  const BoundsPair& bounds_;
  const SearchConfig& cfg_;
  SearchPolicy policy_;
  const ExpansionHook& hook_;
  Vec3 lo_, hi_;
  double clearance_ = 0.0;
  int checks_per_primitive_ = 2;
  AccelBounds air_or_land_;

  std::vector<Node> nodes_;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenCompare> open_;
  std::unordered_map<StateKey, int, StateKeyHash> closed_;
  std::unordered_map<StateKey, int, StateKeyHash> best_open_;
  std::uint64_t order_ = 0;
  int expansions_ = 0;
  int violations_ = 0;
};

}  // namespace

SearchResult kinodynamic_search(const Vec3& start_pos, const Vec3& start_vel, const Vec3& goal,
                                const Esdf& map, const BoundsPair& bounds,
                                const SearchConfig& cfg, const SearchPolicy& policy,
                                const ExpansionHook& hook) {
  cfg.validate();
  Searcher s(goal, map, bounds, cfg, policy, hook);
  return s.run(start_pos, start_vel);
}

PathSamples sample_path(const std::vector<PathNode>& path, double dt) {
  PathSamples out;
  out.dt = dt;
  if (path.empty()) return out;
  out.positions.push_back(path.front().position);
  out.velocities.push_back(path.front().velocity);
  out.accelerations.push_back(path.size() > 1 ? path[1].primitive.accel : Vec3::Zero());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const PathNode& from = path[i - 1];
    const PathNode& to = path[i];
    const double tau = to.primitive.duration;
    const int steps = std::max(1, static_cast<int>(std::lround(tau / dt)));
    Vec3 end_p, end_v;
    propagate(from.position, from.velocity, to.primitive.accel, tau, end_p, end_v);
    // A touchdown snaps the end onto the ground; spread that offset over the segment.
    const double snap = to.position.z() - end_p.z();
    for (int k = 1; k <= steps; ++k) {
      const double t = tau * k / steps;
      Vec3 p, v;
      propagate(from.position, from.velocity, to.primitive.accel, t, p, v);
      p.z() += snap * (t / tau);
      if (k == steps) {
        p = to.position;
        v = to.velocity;
      }
      out.positions.push_back(p);
      out.velocities.push_back(v);
      const bool last = (i + 1 == path.size()) && k == steps;
      out.accelerations.push_back(last ? Vec3::Zero()
                                       : (k == steps ? path[i + 1].primitive.accel
                                                     : to.primitive.accel));
    }
  }
  return out;
}

}  // namespace bimodal
