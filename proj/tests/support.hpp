#pragma once

#include "bimodal/core.hpp"
#include "bimodal/esdf.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace bimodal::testing {

inline OccupancyGrid random_grid(std::mt19937_64& rng, int n, double fill, double res = 0.1,
                                 const Vec3& origin = Vec3::Zero()) {
  OccupancyGrid g(origin, res, Index3(n, n, n));
  std::bernoulli_distribution occ(fill);
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (occ(rng)) g.set_occupied(Index3(x, y, z));
  return g;
}

// Exhaustive nearest-occupied scan, clamped.
inline double brute_force_distance(const OccupancyGrid& g, const Index3& at, double truncation) {
  double best = std::numeric_limits<double>::infinity();
  const Index3& d = g.dims();
  for (int z = 0; z < d.z(); ++z)
    for (int y = 0; y < d.y(); ++y)
      for (int x = 0; x < d.x(); ++x) {
        if (!g.occupied(Index3(x, y, z))) continue;
        const double dx = x - at.x(), dy = y - at.y(), dz = z - at.z();
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz) * g.resolution());
      }
  return std::min(best, truncation);
}

// Central difference of a scalar function of one coordinate of one point.
template <class F>
double central_difference(F&& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace bimodal::testing
