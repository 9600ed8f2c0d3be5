#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bimodal {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Index3 = Eigen::Vector3i;

inline constexpr double kGravity = 9.81;

inline Vec3 gravity_vector(double g = kGravity) { return {0.0, 0.0, g}; }

enum class Mode : std::uint8_t { Land, Air };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

/// Euler angles are stored as (roll, pitch, yaw) in a Vec3.
struct VehicleState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 attitude = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Mode mode = Mode::Land;
  double time = 0.0;

  double yaw() const { return attitude.z(); }
};

/// Thrown by constructors and validators when an input violates its invariants.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct VehicleParams {
  double mass = 2.0;
  Vec3 inertia{0.02, 0.02, 0.04};
  // Per-axis maximum thrust F1_max (x, y, z).
  Vec3 thrust_max{15.7, 15.7, 31.4};
  // Per-axis maximum driving force F2_max (x, y).
  Vec2 drive_max{6.0, 6.0};
  // Wheel geometry: each wheel sits w/2 off the centreline; front axle at +b,
  // rear axle at -a.
  double wheel_track = 0.3;
  double front_offset = 0.15;  // b
  double rear_offset = 0.15;   // a
  double wheel_radius = 0.05;
  double ground_grip = 0.8;       // lateral tyre friction coefficient on ordinary ground
  double k_torque_air = 1.7e-9;   // N·m/rpm²
  double k_thrust_air = 1.0e-7;   // N/rpm², rotor thrust = k·rpm²
  double k_torque_land = 5.5e-8;  // N·m/rpm²
  double gravity = kGravity;

  /// Per-axis thrust limits from a total thrust and a tilt cap:
  /// horizontal = F_total·sin(tilt), vertical = F_total.
  static Vec3 tilt_limited_thrust(double total_thrust, double max_tilt_rad);

  double wheel_force_max() const { return drive_max.x() / 4.0; }

  void validate() const;
};

/// Axis-aligned voxel grid. Voxel (i,j,k) covers
/// [origin + (i,j,k)·res, origin + (i+1,j+1,k+1)·res).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Vec3& origin, double resolution, const Index3& dims);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Index3& dims() const { return dims_; }
  std::size_t size() const { return occupied_.size(); }
  bool empty() const { return occupied_.empty(); }

  Vec3 upper_corner() const { return origin_ + dims_.cast<double>() * resolution_; }

  bool in_bounds(const Index3& idx) const;
  bool in_bounds(const Vec3& p) const;

  std::size_t linear_index(const Index3& idx) const {
    return static_cast<std::size_t>(idx.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(idx.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(idx.z()));
  }
  Index3 unravel(std::size_t linear) const;

  // Floors the world coordinate; the result may be out of bounds.
  Index3 world_to_index(const Vec3& p) const;
  Vec3 index_to_world(const Index3& idx) const;  // voxel centre

  bool occupied(const Index3& idx) const { return occupied_[linear_index(idx)] != 0; }
  // Out-of-bounds points count as free.
  bool occupied(const Vec3& p) const;
  void set_occupied(const Index3& idx, bool value = true);
  // Marks every voxel whose centre lies inside [lo, hi].
  void fill_box(const Vec3& lo, const Vec3& hi, bool value = true);

  std::size_t occupied_count() const;

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  Index3 dims_ = Index3::Zero();
  std::vector<std::uint8_t> occupied_;
};

}  // namespace bimodal
