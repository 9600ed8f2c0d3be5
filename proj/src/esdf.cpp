#include "bimodal/esdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bimodal {
namespace {

// Large but finite so parabola intersections never see inf - inf.
constexpr double kFar = 1e20;

}  // namespace

void distance_transform_1d(std::vector<double>& f) {
  const int n = static_cast<int>(f.size());
  if (n == 0) return;
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  std::vector<double> d(n);
  for (double& x : f) {
    if (!(x < kFar)) x = kFar;
  }
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const int r = v[k];
      s = ((f[q] + q * static_cast<double>(q)) - (f[r] + r * static_cast<double>(r))) /
          (2.0 * (q - r));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kFar;
      z[1] = kFar;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = f[v[k]] >= kFar ? std::numeric_limits<double>::infinity() : dq * dq + f[v[k]];
  }
  f.swap(d);
}

Esdf build_esdf(const OccupancyGrid& grid, double truncation) {
  if (grid.empty()) throw InvalidArgument("build_esdf: empty grid");
  if (!(truncation > 0.0)) throw InvalidArgument("build_esdf: truncation must be positive");

  const Index3 dims = grid.dims();
  std::vector<double> sq(grid.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    sq[i] = grid.occupied(grid.unravel(i)) ? 0.0 : kFar;
  }

  std::vector<double> line;
  // One pass per axis; squared distances are in voxel units.
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    line.resize(static_cast<std::size_t>(dims[axis]));
    Index3 idx;
    for (int u = 0; u < dims[a1]; ++u) {
      for (int w = 0; w < dims[a2]; ++w) {
        idx[a1] = u;
        idx[a2] = w;
        for (int t = 0; t < dims[axis]; ++t) {
          idx[axis] = t;
          line[t] = sq[grid.linear_index(idx)];
        }
        distance_transform_1d(line);
        for (int t = 0; t < dims[axis]; ++t) {
          idx[axis] = t;
          sq[grid.linear_index(idx)] = std::min(line[t], kFar);
        }
      }
    }
  }

  Esdf esdf;
  esdf.grid_ = grid;
  esdf.truncation_ = truncation;
  esdf.distance_.resize(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    esdf.distance_[i] = std::min(std::sqrt(sq[i]) * grid.resolution(), truncation);
  }
  return esdf;
}

DistanceQuery Esdf::query(const Vec3& p) const {
  DistanceQuery out;
  const double res = grid_.resolution();
  const Index3& dims = grid_.dims();
  Vec3 q = p;
  const Vec3 lo = grid_.origin();
  const Vec3 hi = grid_.upper_corner();
  for (int a = 0; a < 3; ++a) {
    if (q[a] < lo[a] || q[a] > hi[a]) {
      out.out_of_bounds = true;
      q[a] = std::clamp(q[a], lo[a], hi[a]);
    }
  }

  // Continuous coordinate in voxel-centre units.
  Index3 base;
  Vec3 frac;
  std::array<bool, 3> clamped{};
  for (int a = 0; a < 3; ++a) {
    const double c = (q[a] - lo[a]) / res - 0.5;
    const double cmax = dims[a] - 1;
    if (c <= 0.0 || c >= cmax || dims[a] == 1) {
      clamped[a] = true;
    }
    const double cc = std::clamp(c, 0.0, cmax);
    int b = static_cast<int>(std::floor(cc));
    if (b >= dims[a] - 1) b = std::max(dims[a] - 2, 0);
    base[a] = b;
    frac[a] = dims[a] == 1 ? 0.0 : cc - b;
  }

  auto value = [&](int dx, int dy, int dz) {
    Index3 idx(std::min(base.x() + dx, dims.x() - 1), std::min(base.y() + dy, dims.y() - 1),
               std::min(base.z() + dz, dims.z() - 1));
    return distance_[grid_.linear_index(idx)];
  };

  double c[2][2][2];
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz) c[dx][dy][dz] = value(dx, dy, dz);

  const double fx = frac.x(), fy = frac.y(), fz = frac.z();
  double d = 0.0;
  Vec3 g = Vec3::Zero();
  for (int dx = 0; dx < 2; ++dx) {
    const double wx = dx ? fx : 1.0 - fx;
    const double sx = dx ? 1.0 : -1.0;
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? fy : 1.0 - fy;
      const double sy = dy ? 1.0 : -1.0;
      for (int dz = 0; dz < 2; ++dz) {
        const double wz = dz ? fz : 1.0 - fz;
        const double sz = dz ? 1.0 : -1.0;
        const double v = c[dx][dy][dz];
        d += wx * wy * wz * v;
        g.x() += sx * wy * wz * v;
        g.y() += wx * sy * wz * v;
        g.z() += wx * wy * sz * v;
      }
    }
  }
  g /= res;
  for (int a = 0; a < 3; ++a) {
    if (clamped[a]) g[a] = 0.0;
  }
  out.distance = d;
  out.gradient = g;
  return out;
}

}  // namespace bimodal
