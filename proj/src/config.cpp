#include "bimodal/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace bimodal {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void decode_value(const json& j, double& v, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number", where);
  v = j.get<double>();
}
void decode_value(const json& j, int& v, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer", where);
  v = j.get<int>();
}
void decode_value(const json& j, std::uint64_t& v, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ConfigError(where + ": expected a non-negative integer", where);
  }
  v = j.get<std::uint64_t>();
}
void decode_value(const json& j, bool& v, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected true or false", where);
  v = j.get<bool>();
}
void decode_value(const json& j, std::string& v, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string", where);
  v = j.get<std::string>();
}
void decode_value(const json& j, std::vector<std::string>& v, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of strings", where);
  v.clear();
  for (const auto& e : j) {
    if (!e.is_string()) throw ConfigError(where + ": expected an array of strings", where);
    v.push_back(e.get<std::string>());
  }
}
template <int N>
void decode_value(const json& j, Eigen::Matrix<double, N, 1>& v, const std::string& where) {
  if (!j.is_array() || j.size() != N) {
    throw ConfigError(where + ": expected an array of " + std::to_string(N) + " numbers", where);
  }
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers", where);
    v[i] = j[i].get<double>();
  }
}
void decode_value(const json& j, Index3& v, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected 3 integers", where);
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer()) throw ConfigError(where + ": expected integers", where);
    v[i] = j[i].get<int>();
  }
}
void decode_value(const json& j, Mode& v, const std::string& where) {
  std::string s;
  decode_value(j, s, where);
  try {
    v = mode_from_string(s);
  } catch (const InvalidArgument&) {
    throw ConfigError(where + ": expected \"land\" or \"air\"", where);
  }
}
void decode_value(const json& j, PlannerVariant& v, const std::string& where) {
  std::string s;
  decode_value(j, s, where);
  try {
    v = variant_from_string(s);
  } catch (const InvalidArgument&) {
    throw ConfigError(where + ": expected \"adaptive\" or \"fixed_bounds\"", where);
  }
}

json encode_value(double v) { return v; }
json encode_value(int v) { return v; }
json encode_value(std::uint64_t v) { return v; }
json encode_value(bool v) { return v; }
json encode_value(const std::string& v) { return v; }
json encode_value(const std::vector<std::string>& v) { return v; }
template <int N>
json encode_value(const Eigen::Matrix<double, N, 1>& v) {
  json a = json::array();
  for (int i = 0; i < N; ++i) a.push_back(v[i]);
  return a;
}
json encode_value(const Index3& v) { return json::array({v.x(), v.y(), v.z()}); }
json encode_value(Mode m) { return std::string(to_string(m)); }
json encode_value(PlannerVariant v) { return std::string(to_string(v)); }

class Reader {
 public:
  static constexpr bool reading = true;
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object", path_);
  }

  template <typename T>
  void field(const char* key, T& v) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    decode_value(*it, v, join(path_, key));
  }

  template <typename T>
  void object(const char* key, T& v) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Reader sub(*it, join(path_, key));
    visit(sub, v);
    sub.finish();
  }

  template <typename T>
  void list(const char* key, std::vector<T>& v) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string p = join(path_, key);
    if (!it->is_array()) throw ConfigError(p + ": expected an array", p);
    v.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      T item;
      Reader sub((*it)[i], p + "[" + std::to_string(i) + "]");
      visit(sub, item);
      sub.finish();
      v.push_back(item);
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        const std::string p = join(path_, it.key());
        throw ConfigError("unknown key '" + p + "'", p);
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  static constexpr bool reading = false;
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }

  template <typename T>
  void field(const char* key, T& v) {
    j_[key] = encode_value(v);
  }
  template <typename T>
  void object(const char* key, T& v) {
    json sub;
    Writer w(sub);
    visit(w, v);
    j_[key] = sub;
  }
  template <typename T>
  void list(const char* key, std::vector<T>& v) {
    json arr = json::array();
    for (T& item : v) {
      json sub;
      Writer w(sub);
      visit(w, item);
      arr.push_back(sub);
    }
    j_[key] = arr;
  }

 private:
  json& j_;
};

template <class A> void visit(A& a, Box& b) {
  a.field("min", b.min);
  a.field("max", b.max);
}

template <class A> void visit(A& a, MapSpec& m) {
  a.field("origin", m.origin);
  a.field("resolution", m.resolution);
  a.field("dims", m.dims);
  a.field("truncation", m.truncation);
  a.list("obstacles", m.obstacles);
}

template <class A> void visit(A& a, WindZone& w) {
  a.field("min", w.min);
  a.field("max", w.max);
  a.field("force", w.force);
  a.field("gust_amplitude", w.gust_amplitude);
  a.field("gust_frequency", w.gust_frequency);
}

template <class A> void visit(A& a, ResistanceZone& r) {
  a.field("min", r.min);
  a.field("max", r.max);
  a.field("friction", r.friction);
  a.field("lateral_friction", r.lateral_friction);
  a.field("moment_arm", r.moment_arm);
  a.field("viscous", r.viscous);
}

template <class A> void visit(A& a, StartState& s) {
  a.field("position", s.position);
  a.field("velocity", s.velocity);
  a.field("yaw", s.yaw);
  a.field("mode", s.mode);
}

template <class A> void visit(A& a, VehicleParams& p) {
  a.field("mass", p.mass);
  a.field("inertia", p.inertia);
  a.field("thrust_max", p.thrust_max);
  a.field("drive_max", p.drive_max);
  a.field("wheel_track", p.wheel_track);
  a.field("front_offset", p.front_offset);
  a.field("rear_offset", p.rear_offset);
  a.field("wheel_radius", p.wheel_radius);
  a.field("ground_grip", p.ground_grip);
  a.field("k_torque_air", p.k_torque_air);
  a.field("k_thrust_air", p.k_thrust_air);
  a.field("k_torque_land", p.k_torque_land);
  a.field("gravity", p.gravity);
}

template <class A> void visit(A& a, SearchConfig& c) {
  a.field("altitude_threshold", c.altitude_threshold);
  a.field("epsilon", c.epsilon);
  a.field("samples_per_axis", c.samples_per_axis);
  a.field("velocity_window", c.velocity_window);
  a.field("heuristic_weight", c.heuristic_weight);
  a.field("include_zero_accel", c.include_zero_accel);
  a.field("primitive_duration", c.primitive_duration);
  a.field("position_resolution", c.position_resolution);
  a.field("velocity_bin", c.velocity_bin);
  a.field("max_speed", c.max_speed);
  a.field("weight_altitude", c.weight_altitude);
  a.field("weight_direction", c.weight_direction);
  a.field("time_weight", c.time_weight);
  a.field("goal_tolerance", c.goal_tolerance);
  a.field("clearance", c.clearance);
  a.field("touchdown_speed", c.touchdown_speed);
  a.field("max_expansions", c.max_expansions);
}

template <class A> void visit(A& a, OptimizeConfig& c) {
  a.field("weight_smooth", c.weight_smooth);
  a.field("weight_collision", c.weight_collision);
  a.field("weight_velocity", c.weight_velocity);
  a.field("weight_accel", c.weight_accel);
  a.field("beta", c.beta);
  a.field("max_speed", c.max_speed);
  a.field("clearance", c.clearance);
  a.field("max_iterations", c.max_iterations);
  a.field("gradient_tolerance", c.gradient_tolerance);
  a.field("memory", c.memory);
  a.field("planar", c.planar);
}

template <class A> void visit(A& a, SwitchConfig& c) {
  a.field("air_threshold", c.air_threshold);
  a.field("ground_threshold", c.ground_threshold);
  a.field("altitude_threshold", c.altitude_threshold);
  a.field("horizon", c.horizon);
  a.field("horizon_spacing", c.horizon_spacing);
  a.field("dwell_time", c.dwell_time);
  a.field("detour_offset", c.detour_offset);
  a.field("detour_lookahead", c.detour_lookahead);
  a.field("settle_time", c.settle_time);
}

template <class A> void visit(A& a, ObserverConfig& c) {
  a.field("time_constant", c.time_constant);
  a.field("velocity_noise", c.velocity_noise);
}

template <class A> void visit(A& a, TrackingGains& g) {
  a.field("air_kp", g.air_kp);
  a.field("air_kd", g.air_kd);
  a.field("land_kp", g.land_kp);
  a.field("land_kd", g.land_kd);
  a.field("heading_kp", g.heading_kp);
  a.field("heading_kd", g.heading_kd);
  a.field("attitude_kp", g.attitude_kp);
  a.field("attitude_kd", g.attitude_kd);
  a.field("max_heading_offset", g.max_heading_offset);
  a.field("land_disturbance_compensation", g.land_disturbance_compensation);
}

template <class A> void visit(A& a, SimConfig& s) {
  a.field("dt_dynamics", s.dt_dynamics);
  a.field("dt_control", s.dt_control);
  a.field("replan_hz", s.replan_hz);
  a.field("timeout", s.timeout);
  a.field("goal_tolerance", s.goal_tolerance);
  a.field("seed", s.seed);
  a.field("hold_position", s.hold_position);
  a.field("replan_error_threshold", s.replan_error_threshold);
  a.field("replan_period", s.replan_period);
  a.field("bounds_change_threshold", s.bounds_change_threshold);
  a.field("max_consecutive_failures", s.max_consecutive_failures);
}

struct PlannerExtras {
  PlannerConfig* p;
};

template <class A> void visit(A& a, PlannerExtras& e) {
  a.field("optimize_enabled", e.p->optimize_enabled);
  a.field("descent_extra", e.p->descent_extra);
  a.field("descent_altitude_weight", e.p->descent_altitude_weight);
}

template <class A> void visit(A& a, ScenarioConfig& c) {
  a.field("name", c.name);
  a.object("map", c.map);
  a.list("wind_zones", c.wind_zones);
  a.list("resistance_zones", c.resistance_zones);
  a.object("start", c.start);
  a.field("goal", c.goal);
  a.object("vehicle", c.vehicle);
  a.object("search", c.planner.search);
  a.object("optimize", c.planner.optimize);
  PlannerExtras extras{&c.planner};
  a.object("planner", extras);
  a.object("switch", c.switching);
  a.object("observer", c.observer);
  a.object("tracking", c.tracking);
  a.object("sim", c.sim);
  a.field("planner_variant", c.variant);
  a.field("expect_lower", c.expect_lower);
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string field_of(const std::string& message) {
  // Validation messages start with the field path.
  const auto space = message.find(' ');
  std::string head = message.substr(0, space);
  if (!head.empty() && head.back() == ':') head.pop_back();
  return head;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": parse error: " << e.what();
    throw ConfigError(msg.str(), "", line, col);
  }
  ScenarioConfig cfg;
  try {
    Reader r(doc, "");
    visit(r, cfg);
    r.finish();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what(), e.field());
  }
  // Keep the two copies of the altitude threshold in step when only one is given.
  if (doc.contains("search") && doc["search"].contains("altitude_threshold") &&
      !(doc.contains("switch") && doc["switch"].contains("altitude_threshold"))) {
    cfg.switching.altitude_threshold = cfg.planner.search.altitude_threshold;
  } else if (doc.contains("switch") && doc["switch"].contains("altitude_threshold") &&
             !(doc.contains("search") && doc["search"].contains("altitude_threshold"))) {
    cfg.planner.search.altitude_threshold = cfg.switching.altitude_threshold;
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(source + ": " + e.what(), field_of(e.what()));
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  ScenarioConfig copy = cfg;
  json doc;
  Writer w(doc);
  visit(w, copy);
  return doc.dump(2) + "\n";
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace bimodal
