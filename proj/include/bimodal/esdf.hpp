#pragma once

#include "bimodal/core.hpp"

#include <vector>

namespace bimodal {

struct DistanceQuery {
  double distance = 0.0;
  Vec3 gradient = Vec3::Zero();
  bool out_of_bounds = false;
};

/// Unsigned Euclidean distance field over an occupancy grid.
///
/// Each voxel stores the exact distance from its centre to the nearest
/// occupied voxel centre, clamped to the truncation distance. Occupied voxels
/// hold zero.
class Esdf {
 public:
  Esdf() = default;

  const OccupancyGrid& grid() const { return grid_; }
  double truncation() const { return truncation_; }

  double at(const Index3& idx) const { return distance_[grid_.linear_index(idx)]; }
  const std::vector<double>& values() const { return distance_; }

  /// Trilinear interpolation between the eight surrounding voxel centres.
  ///
  /// Points inside the grid but outside the hull of voxel centres use the
  /// nearest centre plane along that axis. Points outside the grid are clamped
  /// onto it and flagged. The gradient is the exact derivative of the
  /// interpolant, i.e. a finite difference of neighbouring voxel values.
  DistanceQuery query(const Vec3& p) const;
  double distance(const Vec3& p) const { return query(p).distance; }

 private:
  friend Esdf build_esdf(const OccupancyGrid& grid, double truncation);

  OccupancyGrid grid_;
  double truncation_ = 2.0;
  std::vector<double> distance_;
};

/// Exact distance transform (separable lower-envelope of parabolas along each
/// axis) followed by clamping to `truncation`.
Esdf build_esdf(const OccupancyGrid& grid, double truncation = 2.0);

/// One-dimensional squared distance transform of a sampled function; exposed
/// for testing. `f` holds squared distances (or +inf) and is overwritten.
void distance_transform_1d(std::vector<double>& f);

}  // namespace bimodal
