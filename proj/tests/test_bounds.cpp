#include "bimodal/bounds.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace bimodal;

namespace {

VehicleParams example_params() {
  VehicleParams p;
  p.mass = 1.0;
  p.thrust_max = Vec3(5, 5, 20);
  p.drive_max = Vec2(3, 3);
  return p;
}

void expect_interval(const AccelBounds& b, int axis, double lo, double hi) {
  EXPECT_NEAR(b.min[axis], lo, 1e-12) << "axis " << axis;
  EXPECT_NEAR(b.max[axis], hi, 1e-12) << "axis " << axis;
}

}  // namespace

TEST(AirBounds, NoWind) {
  const AccelBounds b = air_bounds(Vec3(0, 0, -9.81), example_params());
  EXPECT_EQ(b.mode, Mode::Air);
  expect_interval(b, 0, -5, 5);
  expect_interval(b, 1, -5, 5);
  expect_interval(b, 2, -9.81, 10.19);
}

TEST(AirBounds, HeadwindShiftsAgainstWind) {
  expect_interval(air_bounds(Vec3(-2, 0, -9.81), example_params()), 0, -7, 3);
}

TEST(AirBounds, ZeroEstimate) {
  const AccelBounds b = air_bounds(Vec3::Zero(), example_params());
  expect_interval(b, 0, -5, 5);
  expect_interval(b, 2, 0, 20);
}

TEST(LandBounds, Examples) {
  const VehicleParams p = example_params();
  const AccelBounds b = land_bounds(Vec3::Zero(), p);
  EXPECT_EQ(b.mode, Mode::Land);
  expect_interval(b, 0, -3, 3);
  expect_interval(b, 1, -3, 3);
  expect_interval(b, 2, 0, 0);
  expect_interval(land_bounds(Vec3(-1.5, 0, 0), p), 0, -4.5, 1.5);
  const AccelBounds blocked = land_bounds(Vec3(-3.1, 0, 0), p);
  expect_interval(blocked, 0, -6.1, -0.1);
  EXPECT_LT(blocked.max.x(), 0.0);
}

TEST(Bounds, WidthInvariantAndUnitShiftOnRandomSamples) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-20, 20), pos(0.1, 50);
  for (int i = 0; i < 1000; ++i) {
    VehicleParams p;
    p.mass = pos(rng);
    p.thrust_max = Vec3(pos(rng), pos(rng), pos(rng));
    p.drive_max = Vec2(pos(rng), pos(rng));
    const Vec3 e(d(rng), d(rng), d(rng)), delta(d(rng), d(rng), d(rng));
    const AccelBounds a = air_bounds(e, p), a2 = air_bounds(e + delta, p);
    const AccelBounds l = land_bounds(Vec3(e.x(), e.y(), 0), p);
    const AccelBounds l2 = land_bounds(Vec3(e.x() + delta.x(), e.y() + delta.y(), 0), p);
    for (int k = 0; k < 3; ++k) {
      ASSERT_LE(a.min[k], a.max[k]);
      ASSERT_LE(l.min[k], l.max[k]);
      ASSERT_NEAR(a2.min[k] - a.min[k], delta[k], 1e-12);
      ASSERT_NEAR(a2.max[k] - a.max[k], delta[k], 1e-12);
    }
    for (int k = 0; k < 2; ++k) {
      ASSERT_NEAR(a.width()[k], 2 * p.thrust_max[k] / p.mass, 1e-12);
      ASSERT_NEAR(l.width()[k], 2 * p.drive_max[k] / p.mass, 1e-12);
      ASSERT_NEAR(l2.min[k] - l.min[k], delta[k], 1e-12);
    }
    ASSERT_NEAR(a.width().z(), p.thrust_max.z() / p.mass, 1e-12);
    ASSERT_EQ(l.min.z(), 0.0);
    ASSERT_EQ(l.max.z(), 0.0);
  }
}

TEST(Bounds, NominalAndAltitudeSelection) {
  VehicleParams p;
  const BoundsPair n = nominal_bounds(p);
  EXPECT_NEAR(n.air.min.z(), -p.gravity, 1e-12);
  EXPECT_EQ(n.land.min, Vec3(-3, -3, 0));
  EXPECT_EQ(&n.for_altitude(0.31, 0.3), &n.air);
  EXPECT_EQ(&n.for_altitude(0.3, 0.3), &n.land);
}

TEST(Bounds, TiltLimitedThrustDecomposition) {
  const Vec3 t = VehicleParams::tilt_limited_thrust(31.4, std::numbers::pi / 6);
  EXPECT_NEAR(t.x(), 15.7, 1e-12);
  EXPECT_NEAR(t.y(), 15.7, 1e-12);
  EXPECT_NEAR(t.z(), 31.4, 1e-12);
}

TEST(Bounds, ContainsAndShift) {
  const AccelBounds b = air_bounds(Vec3(0, 0, -9.81), example_params());
  EXPECT_TRUE(b.contains(Vec3(5, -5, 0)));
  EXPECT_FALSE(b.contains(Vec3(5.1, 0, 0)));
  const AccelBounds s = b.shifted(Vec3(1, 0, 0));
  EXPECT_NEAR(s.max.x(), 6, 1e-12);
}
