#include "bimodal/dynamics.hpp"
#include "support.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include <numbers>

using namespace bimodal;
using bimodal::testing::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

VehicleParams unit_mass() {
  VehicleParams p;
  p.mass = 1.0;
  return p;
}

VehicleState air_state(const Vec3& att = Vec3::Zero()) {
  VehicleState s;
  s.mode = Mode::Air;
  s.attitude = att;
  return s;
}

}  // namespace

TEST(ThrustAxis, LevelAndPitched) {
  EXPECT_TRUE(thrust_axis(Vec3::Zero()).isApprox(Vec3(0, 0, 1), 1e-15));
  EXPECT_NEAR((thrust_axis(Vec3(0, kPi / 2, 0)) - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(ThrustAxis, MatchesRotationMatrixThirdColumn) {
  // Independent route: third column of Rz(ψ)·Ry(θ)·Rx(φ).
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 50; ++i) {
    const Vec3 att(u(rng) / 2.1, u(rng) / 2.1, u(rng));
    const Eigen::Matrix3d R = (Eigen::AngleAxisd(att.z(), Vec3::UnitZ()) *
                               Eigen::AngleAxisd(att.y(), Vec3::UnitY()) *
                               Eigen::AngleAxisd(att.x(), Vec3::UnitX()))
                                  .toRotationMatrix();
    EXPECT_NEAR((thrust_axis(att) - R.col(2)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(thrust_axis(att).norm(), 1.0, 1e-12);
  }
}

TEST(FlightAccel, HoverFreeFallAndPitchedWithWind) {
  const VehicleParams p = unit_mass();
  EXPECT_NEAR(flight_accel(air_state(), {9.81, Vec3::Zero()}, Vec3::Zero(), p).norm(), 0.0, 1e-12);
  EXPECT_TRUE(flight_accel(air_state(), {0.0, Vec3::Zero()}, Vec3::Zero(), p)
                  .isApprox(Vec3(0, 0, -9.81), 1e-12));
  const Vec3 a = flight_accel(air_state(Vec3(0, kPi / 2, 0)), {9.81, Vec3::Zero()},
                              Vec3(1, 0, 0), p);
  EXPECT_NEAR((a - Vec3(8.81, 0, -9.81)).norm(), 0.0, 1e-12);
}

TEST(FlightAccel, AffineInThrust) {
  VehicleParams p;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.6, 0.6), f(0.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const VehicleState s = air_state(Vec3(u(rng), u(rng), 4 * u(rng)));
    const Vec3 d(u(rng), u(rng), u(rng));
    const double f1 = f(rng), f2 = f(rng), w = 0.3;
    const Vec3 mix = flight_accel(s, {w * f1 + (1 - w) * f2, Vec3::Zero()}, d, p);
    const Vec3 lin = w * flight_accel(s, {f1, Vec3::Zero()}, d, p) +
                     (1 - w) * flight_accel(s, {f2, Vec3::Zero()}, d, p);
    EXPECT_NEAR((mix - lin).norm(), 0.0, 1e-12);
  }
}

TEST(AngularAccel, IsotropicInertiaNoInputs) {
  VehicleParams p;
  p.inertia = Vec3::Constant(0.03);
  VehicleState s = air_state();
  s.angular_velocity = Vec3(1.0, -2.0, 0.5);
  EXPECT_NEAR(flight_angular_accel(s, {}, Vec3::Zero(), p).norm(), 0.0, 1e-12);
}

TEST(AngularAccel, PureInertiaDivision) {
  VehicleParams p;
  p.inertia = Vec3(0.05, 0.05, 0.05);
  const Vec3 a = flight_angular_accel(air_state(), {0.0, Vec3(0.1, 0, 0)}, Vec3::Zero(), p);
  EXPECT_NEAR((a - Vec3(2, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(AngularAccel, GyroscopicCoupling) {
  VehicleParams p;
  p.inertia = Vec3(0.02, 0.03, 0.04);
  VehicleState s = air_state();
  s.angular_velocity = Vec3(1, 2, 3);
  const double Jx = 0.02, Jy = 0.03, Jz = 0.04, wp = 1, wt = 2, ws = 3;
  const Vec3 want(-(Jy - Jz) * ws * wt / Jx, -(Jz - Jx) * wp * ws / Jy, -(Jx - Jy) * wp * wt / Jz);
  EXPECT_NEAR((flight_angular_accel(s, {}, Vec3::Zero(), p) - want).norm(), 0.0, 1e-12);
}

TEST(AngularAccel, ExternalTorqueOpposes) {
  VehicleParams p;
  const Vec3 n(0.01, -0.02, 0.004);
  const Vec3 a = flight_angular_accel(air_state(), {}, n, p);
  EXPECT_NEAR((a + n.cwiseQuotient(p.inertia)).norm(), 0.0, 1e-12);
}

TEST(LandAccel, StraightAndRotated) {
  const VehicleParams p = unit_mass();
  VehicleState s;
  EXPECT_NEAR((land_accel(s, {1, 1}, Vec3::Zero(), p) - Vec3(4, 0, 0)).norm(), 0.0, 1e-12);
  s.attitude.z() = kPi / 2;
  EXPECT_NEAR((land_accel(s, {1, 1}, Vec3::Zero(), p) - Vec3(0, 4, 0)).norm(), 0.0, 1e-12);
}

TEST(LandAccel, MatrixOracle) {
  VehicleParams p;
  p.mass = 2.0;
  VehicleState s;
  const double psi = kPi / 4;
  s.attitude.z() = psi;
  Eigen::Matrix<double, 3, 2> C;
  C << 2 * std::cos(psi), 2 * std::cos(psi), 2 * std::sin(psi), 2 * std::sin(psi), 0, 0;
  Eigen::Matrix3d H;
  H << std::cos(psi), -std::sin(psi), 0, std::sin(psi), std::cos(psi), 0, 0, 0, 1;
  const Eigen::Matrix3d Minv = Eigen::Vector3d(1 / 2.0, 1 / 2.0, 0).asDiagonal();
  const Vec3 want = Minv * (C * Eigen::Vector2d(1, 0.5) - H * Vec3(1, 0, 0));
  EXPECT_NEAR((land_accel(s, {1, 0.5}, Vec3(1, 0, 0), p) - want).norm(), 0.0, 1e-12);
}

TEST(LandAccel, VerticalComponentAlwaysZero) {
  VehicleParams p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 200; ++i) {
    VehicleState s;
    s.attitude.z() = u(rng);
    s.velocity = Vec3(u(rng), u(rng), 0);
    EXPECT_EQ(land_accel(s, {u(rng), u(rng)}, Vec3(u(rng), u(rng), 0), p).z(), 0.0);
  }
}

TEST(TireGrip, OpposesSideslipOnly) {
  VehicleParams p;
  EXPECT_EQ(tire_grip_force(Vec3(2.0, 0, 0), 0.0, p).norm(), 0.0);
  const Vec3 f = tire_grip_force(Vec3(1.0, 0.3, 0), 0.0, p);
  EXPECT_EQ(f.x(), 0.0);
  EXPECT_LT(f.y(), 0.0);
  EXPECT_LE(std::abs(f.y()), p.ground_grip * p.mass * p.gravity + 1e-12);
  p.ground_grip = 0.0;
  EXPECT_EQ(tire_grip_force(Vec3(1.0, 0.3, 0), 0.0, p).norm(), 0.0);
}

TEST(ResistiveMoment, Examples) {
  VehicleParams p;
  GroundResistance r;
  r.longitudinal = {1, 1, 1, 1};
  r.lateral = {2, 2, 2, 2};
  EXPECT_NEAR(resistive_moment(r, p), 0.0, 1e-15);

  p.wheel_track = 0.2;
  r = {};
  r.longitudinal = {0, 1, 1, 0};
  EXPECT_NEAR(resistive_moment(r, p), 0.2, 1e-15);

  p.front_offset = 0.15;
  r = {};
  r.lateral = {1, 1, 0, 0};
  EXPECT_NEAR(resistive_moment(r, p), 0.3, 1e-15);
}

TEST(ResistanceTotals, SumPerWheel) {
  GroundResistance r;
  r.longitudinal = {1, 2, 3, 4};
  r.lateral = {-1, 0.5, 0, 2};
  EXPECT_EQ(r.total_longitudinal(), 10.0);
  EXPECT_EQ(r.total_lateral(), 1.5);
}

TEST(YawAccel, Examples) {
  VehicleParams p;
  EXPECT_EQ(land_yaw_accel({1.3, 1.3}, 0.0, p), 0.0);
  p.wheel_track = 0.2;
  p.inertia.z() = 0.04;
  EXPECT_NEAR(land_yaw_accel({0, 1}, 0.0, p), 5.0, 1e-12);
  p.inertia.z() = 0.1;
  EXPECT_NEAR(land_yaw_accel({1, 1}, 0.2, p), -2.0, 1e-12);
}

TEST(Step, LandEquilibrium) {
  VehicleParams p;
  VehicleState s;
  s.position = Vec3(1, 2, 0);
  s.attitude.z() = 0.3;
  const VehicleState n = step(s, LandInput{0, 0}, {}, 0.002, p);
  EXPECT_EQ(n.position, s.position);
  EXPECT_EQ(n.velocity, s.velocity);
  EXPECT_EQ(n.attitude, s.attitude);
  EXPECT_NEAR(n.time, 0.002, 1e-15);
}

TEST(Step, HoverFixedPoint) {
  VehicleParams p;
  VehicleState s = air_state();
  s.position = Vec3(0, 0, 1);
  for (int i = 0; i < 100; ++i) s = step(s, FlightInput{p.mass * p.gravity, Vec3::Zero()}, {}, 0.01, p);
  EXPECT_NEAR((s.position - Vec3(0, 0, 1)).norm(), 0.0, 1e-9);
}

TEST(Step, FreeFallMatchesBallistic) {
  VehicleParams p;
  VehicleState s = air_state();
  s.position = Vec3(0, 0, 10);
  for (int i = 0; i < 500; ++i) s = step(s, FlightInput{}, {}, 0.002, p);
  EXPECT_NEAR(s.position.z() - 10.0, -4.905, 1e-6);
  EXPECT_NEAR(s.velocity.z(), -9.81, 1e-9);
}

TEST(Step, SingleLargeStepExactOnQuadraticMotion) {
  // RK4 local error is O(dt^5); on constant acceleration it vanishes.
  VehicleParams p;
  VehicleState s = air_state();
  s.velocity = Vec3(0.5, 0, 2);
  const VehicleState n = step(s, FlightInput{}, {}, 0.2, p);
  EXPECT_NEAR(n.position.z(), 2 * 0.2 - 0.5 * 9.81 * 0.04, 1e-12);
  EXPECT_NEAR(n.position.x(), 0.1, 1e-12);
}

TEST(Step, LandClampsVerticalAndTilt) {
  VehicleParams p;
  VehicleState s;
  s.velocity = Vec3(1, 0, 0);
  const VehicleState n = step(s, LandInput{1, 1.2}, {}, 0.002, p);
  EXPECT_EQ(n.position.z(), 0.0);
  EXPECT_EQ(n.attitude.x(), 0.0);
  EXPECT_EQ(n.attitude.y(), 0.0);
}

TEST(Step, NonFiniteStateRaises) {
  VehicleParams p;
  VehicleState s = air_state();
  EXPECT_THROW(step(s, FlightInput{std::nan(""), Vec3::Zero()}, {}, 0.002, p), IntegrationError);
  EXPECT_THROW(step(s, FlightInput{}, {}, 0.0, p), InvalidArgument);
}

TEST(MotorPower, Examples) {
  EXPECT_EQ(motor_power(0.0, 1e-8), 0.0);
  EXPECT_NEAR(motor_power(5000.0, 1e-8), 0.25 * 5000 * 2 * kPi / 60, 1e-9);
  EXPECT_NEAR(motor_power(5000.0, 1e-8), 130.8997, 1e-4);
  EXPECT_LT(rel_err(motor_power(3000.0, 2e-9), 8 * motor_power(1500.0, 2e-9)), 1e-14);
}

TEST(MotorPower, RpmInversionRoundTrip) {
  const double k = 5.5e-8;
  for (double rpm : {0.0, 100.0, 2500.0, 9000.0}) {
    EXPECT_NEAR(rpm_from_torque(k * rpm * rpm, k), rpm, 1e-9);
  }
  VehicleParams p;
  const auto air = motor_rpms(FlightInput{p.mass * p.gravity, Vec3::Zero()}, p);
  for (double r : air) EXPECT_NEAR(p.k_thrust_air * r * r * 4, p.mass * p.gravity, 1e-9);
  const auto land = motor_rpms(LandInput{1.0, -0.5}, p);
  EXPECT_EQ(land[0], land[3]);
  EXPECT_EQ(land[1], land[2]);
  EXPECT_GT(land[0], land[1]);
}
