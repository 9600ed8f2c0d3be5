#include "bimodal/core.hpp"

#include <cmath>

namespace bimodal {

std::string_view to_string(Mode mode) { return mode == Mode::Air ? "air" : "land"; }

Mode mode_from_string(std::string_view text) {
  if (text == "air" || text == "Air") return Mode::Air;
  if (text == "land" || text == "Land") return Mode::Land;
  throw InvalidArgument("unknown mode '" + std::string(text) + "'");
}

Vec3 VehicleParams::tilt_limited_thrust(double total_thrust, double max_tilt_rad) {
  const double horizontal = total_thrust * std::sin(max_tilt_rad);
  return {horizontal, horizontal, total_thrust};
}

void VehicleParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string("vehicle.") + name + " must be positive");
    }
  };
  positive(mass, "mass");
  positive(inertia.x(), "inertia.x");
  positive(inertia.y(), "inertia.y");
  positive(inertia.z(), "inertia.z");
  positive(thrust_max.x(), "thrust_max.x");
  positive(thrust_max.y(), "thrust_max.y");
  positive(thrust_max.z(), "thrust_max.z");
  positive(drive_max.x(), "drive_max.x");
  positive(drive_max.y(), "drive_max.y");
  positive(wheel_track, "wheel_track");
  positive(front_offset, "front_offset");
  positive(rear_offset, "rear_offset");
  positive(wheel_radius, "wheel_radius");
  if (!(ground_grip >= 0.0)) throw InvalidArgument("vehicle.ground_grip must be non-negative");
  positive(k_torque_air, "k_torque_air");
  positive(k_thrust_air, "k_thrust_air");
  positive(k_torque_land, "k_torque_land");
  positive(gravity, "gravity");
}

OccupancyGrid::OccupancyGrid(const Vec3& origin, double resolution, const Index3& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
  if ((dims.array() <= 0).any()) throw InvalidArgument("grid dims must be positive");
  occupied_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
}

bool OccupancyGrid::in_bounds(const Index3& idx) const {
  return (idx.array() >= 0).all() && (idx.array() < dims_.array()).all();
}

bool OccupancyGrid::in_bounds(const Vec3& p) const {
  const Vec3 hi = upper_corner();
  return (p.array() >= origin_.array()).all() && (p.array() <= hi.array()).all();
}

Index3 OccupancyGrid::unravel(std::size_t linear) const {
  const auto nx = static_cast<std::size_t>(dims_.x());
  const auto ny = static_cast<std::size_t>(dims_.y());
  return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
          static_cast<int>(linear / (nx * ny))};
}

Index3 OccupancyGrid::world_to_index(const Vec3& p) const {
  const Vec3 rel = (p - origin_) / resolution_;
  return {static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
          static_cast<int>(std::floor(rel.z()))};
}

Vec3 OccupancyGrid::index_to_world(const Index3& idx) const {
  return origin_ + (idx.cast<double>().array() + 0.5).matrix() * resolution_;
}

bool OccupancyGrid::occupied(const Vec3& p) const {
  const Index3 idx = world_to_index(p);
  return in_bounds(idx) && occupied(idx);
}

void OccupancyGrid::set_occupied(const Index3& idx, bool value) {
  if (!in_bounds(idx)) throw InvalidArgument("voxel index out of bounds");
  occupied_[linear_index(idx)] = value ? 1 : 0;
}

void OccupancyGrid::fill_box(const Vec3& lo, const Vec3& hi, bool value) {
  for (int k = 0; k < dims_.z(); ++k) {
    for (int j = 0; j < dims_.y(); ++j) {
      for (int i = 0; i < dims_.x(); ++i) {
        const Vec3 c = index_to_world({i, j, k});
        if ((c.array() >= lo.array()).all() && (c.array() <= hi.array()).all()) {
          occupied_[linear_index({i, j, k})] = value ? 1 : 0;
        }
      }
    }
  }
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto v : occupied_) n += v;
  return n;
}

}  // namespace bimodal
