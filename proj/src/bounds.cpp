#include "bimodal/bounds.hpp"

namespace bimodal {

AccelBounds air_bounds(const Vec3& d1_hat, const VehicleParams& p) {
  const Vec3 cap = p.thrust_max / p.mass;
  AccelBounds b;
  b.mode = Mode::Air;
  b.min = Vec3(-cap.x() + d1_hat.x(), -cap.y() + d1_hat.y(), d1_hat.z());
  b.max = Vec3(cap.x() + d1_hat.x(), cap.y() + d1_hat.y(), cap.z() + d1_hat.z());
  return b;
}

AccelBounds land_bounds(const Vec3& d2_hat, const VehicleParams& p) {
  const double cx = p.drive_max.x() / p.mass;
  const double cy = p.drive_max.y() / p.mass;
  AccelBounds b;
  b.mode = Mode::Land;
  b.min = Vec3(-cx + d2_hat.x(), -cy + d2_hat.y(), 0.0);
  b.max = Vec3(cx + d2_hat.x(), cy + d2_hat.y(), 0.0);
  return b;
}

BoundsPair nominal_bounds(const VehicleParams& p) {
  return {air_bounds(-gravity_vector(p.gravity), p), land_bounds(Vec3::Zero(), p)};
}

}  // namespace bimodal
