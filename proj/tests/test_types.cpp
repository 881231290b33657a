#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "quadsr/types.hpp"

using namespace quadsr;

namespace {

// Independent element-wise form of the Euler-rate matrix.
Mat3 rate_matrix_oracle(double phi, double theta) {
  const double sp = std::sin(phi), cp = std::cos(phi), tt = std::tan(theta), ct = std::cos(theta);
  Mat3 r;
  r << 1, sp * tt, cp * tt, 0, cp, -sp, 0, sp / ct, cp / ct;
  return r;
}

}  // namespace

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-15);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-12);
  EXPECT_NEAR(wrap_angle(-7.0), -7.0 + 2 * kPi, 1e-12);
}

TEST(WrapAngle, Idempotent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double a = wrap_angle(d(rng));
    EXPECT_GT(a, -kPi);
    EXPECT_LE(a, kPi);
    EXPECT_EQ(wrap_angle(a), a);
  }
}

TEST(State, RejectsRollPitchOutsideRange) {
  State s;
  EXPECT_THROW(s.set_phi(kPi / 2), DomainError);
  EXPECT_THROW(s.set_theta(-2.0), DomainError);
  EXPECT_NO_THROW(s.set_phi(1.5));
  EXPECT_DOUBLE_EQ(s.phi(), 1.5);
}

TEST(State, WrapsYawOnWrite) {
  State s;
  s.set_psi(2 * kPi + 0.25);
  EXPECT_NEAR(s.psi(), 0.25, 1e-12);
}

TEST(State, VectorRoundTrip) {
  Vec12 v;
  v << 1, 2, 3, 4, 5, 6, 0.1, -0.2, 0.3, 7, 8, 9;
  EXPECT_TRUE(State::from_vector(v).to_vector().isApprox(v, 1e-15));
  v(7) = 1.6;
  EXPECT_THROW(State::from_vector(v), DomainError);
}

TEST(RotorCommand, SaturationClampsToLimits) {
  const RotorCommand u(-5, 500, 1500, std::nan(""));
  const RotorCommand s = u.saturated();
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 500.0);
  EXPECT_EQ(s[2], kMaxRotorSpeed);
  EXPECT_EQ(s[3], 0.0);
  EXPECT_FALSE(u.within_limits());
  EXPECT_TRUE(s.within_limits());
}

TEST(Mix, MatchesRotorSquares) {
  const VirtualControl f = mix({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(f.f1, 1 + 4 + 9 + 16);
  EXPECT_DOUBLE_EQ(f.f2, 4 + 9 - 1 - 16);
  EXPECT_DOUBLE_EQ(f.f3, 1 + 9 - 4 - 16);
  EXPECT_DOUBLE_EQ(f.f4, 1 + 4 - 9 - 16);
  EXPECT_TRUE(f.feasible());
}

TEST(EulerRate, IdentityAtLevel) { EXPECT_TRUE(euler_rate_transform(0, 0).isApprox(Mat3::Identity(), 1e-15)); }

TEST(EulerRate, QuarterRoll) {
  const double h = std::sqrt(2.0) / 2;
  Mat3 expected;
  expected << 1, 0, 0, 0, h, -h, 0, h, h;
  EXPECT_TRUE(euler_rate_transform(kPi / 4, 0).isApprox(expected, 1e-14));
}

TEST(EulerRate, SingularityGuard) {
  EXPECT_THROW(euler_rate_transform(0.1, kPi / 2 - 1e-9), SingularityError);
  EXPECT_THROW(euler_rate_transform_inverse(0.1, -kPi / 2 + 1e-7), SingularityError);
  EXPECT_THROW(euler_rate_transform_dot(0.1, kPi / 2, 0, 0), SingularityError);
}

TEST(EulerRate, MatchesElementwiseForm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(-1.4, 1.4);
  for (int i = 0; i < 200; ++i) {
    const double phi = a(rng), theta = a(rng);
    EXPECT_TRUE(euler_rate_transform(phi, theta).isApprox(rate_matrix_oracle(phi, theta), 1e-14));
  }
}

TEST(EulerRate, DeterminantIsSecantTheta) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-1.5, 1.5);
  for (int i = 0; i < 500; ++i) {
    const double phi = a(rng), theta = a(rng);
    const double det = euler_rate_transform(phi, theta).determinant();
    EXPECT_NEAR(det * std::cos(theta), 1.0, 1e-12);
  }
}

TEST(EulerRate, InverseIsInverse) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> a(-1.4, 1.4);
  for (int i = 0; i < 200; ++i) {
    const double phi = a(rng), theta = a(rng);
    const Mat3 p = euler_rate_transform(phi, theta) * euler_rate_transform_inverse(phi, theta);
    EXPECT_TRUE(p.isApprox(Mat3::Identity(), 1e-12));
  }
}

TEST(EulerRateDot, StationaryIsZero) { EXPECT_TRUE(euler_rate_transform_dot(0, 0, 0, 0).isZero(0)); }

TEST(EulerRateDot, UnitRollRate) {
  const Mat3 d = euler_rate_transform_dot(0, 0, 1, 0);
  EXPECT_DOUBLE_EQ(d(1, 2), -1.0);
  EXPECT_DOUBLE_EQ(d(1, 1), 0.0);
}

TEST(EulerRateDot, MatchesCentralDifferenceAlongPath) {
  auto phi = [](double t) { return 0.4 * std::sin(1.3 * t) + 0.1; };
  auto theta = [](double t) { return 0.6 * std::cos(0.7 * t) - 0.2; };
  auto phid = [](double t) { return 0.4 * 1.3 * std::cos(1.3 * t); };
  auto thetad = [](double t) { return -0.6 * 0.7 * std::sin(0.7 * t); };
  const double h = 1e-5;
  for (double t = 0; t < 10; t += 0.37) {
    const Mat3 fd =
        (euler_rate_transform(phi(t + h), theta(t + h)) - euler_rate_transform(phi(t - h), theta(t - h))) / (2 * h);
    const Mat3 an = euler_rate_transform_dot(phi(t), theta(t), phid(t), thetad(t));
    EXPECT_LE((fd - an).norm(), 1e-5 * std::max(1.0, an.norm())) << "t = " << t;
  }
}

TEST(InnerState, FromStateUsesRateTransform) {
  State s;
  s.z = -1.5;
  s.vz = 0.25;
  s.set_attitude(0.3, -0.2, 1.0);
  s.wx = 0.5;
  s.wy = -0.4;
  s.wz = 0.9;
  const InnerState in = InnerState::from_state(s);
  const Vec3 rates = rate_matrix_oracle(0.3, -0.2) * Vec3(0.5, -0.4, 0.9);
  EXPECT_DOUBLE_EQ(in.z, -1.5);
  EXPECT_DOUBLE_EQ(in.zdot, 0.25);
  EXPECT_NEAR(in.phidot, rates(0), 1e-14);
  EXPECT_NEAR(in.thetadot, rates(1), 1e-14);
  EXPECT_NEAR(in.psidot, rates(2), 1e-14);
  EXPECT_TRUE(in.body_rates().isApprox(Vec3(0.5, -0.4, 0.9), 1e-13));
}

TEST(GainSet, RejectsNonpositiveGains) {
  const auto c = GainSet::defaults().c_all();
  for (std::size_t i = 0; i < 8; ++i) {
    auto bad = c;
    bad[i] = 0.0;
    EXPECT_THROW(GainSet(1, 1, 1, 1, bad), std::invalid_argument);
    bad[i] = -1.0;
    EXPECT_THROW(GainSet(1, 1, 1, 1, bad), std::invalid_argument);
  }
  EXPECT_THROW(GainSet(0, 1, 1, 1, c), std::invalid_argument);
  EXPECT_THROW(GainSet(1, -1, 1, 1, c), std::invalid_argument);
}

TEST(GainSet, DefaultBacksteppingGains) {
  const GainSet g = GainSet::defaults();
  const std::array<double, 8> expected = {11.52, 28.00, 16.63, 6.54, 8.40, 27.50, 15.54, 5.49};
  for (int i = 1; i <= 8; ++i) EXPECT_DOUBLE_EQ(g.c(i), expected[static_cast<std::size_t>(i - 1)]);
}

TEST(PlantParams, DefaultsAndValidation) {
  PlantParams p;
  EXPECT_DOUBLE_EQ(p.m, 1.4);
  EXPECT_DOUBLE_EQ(p.Ct, 1.105e-5);
  EXPECT_NO_THROW(p.validate());
  p.Jzz = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Trajectory, DerivativesMatchFiniteDifferences) {
  const std::array<Trajectory, 3> trajs = {Trajectory::constant(2.0), Trajectory::ramp(1.0, -0.3),
                                           Trajectory::sine(3.0, 0.5, kPi / 3, 0.5)};
  const double h = 1e-4;
  for (const auto& tr : trajs) {
    for (double t = 0; t < 20; t += 0.9) {
      const RefPoint p = tr(t);
      const double rate_fd = (tr(t + h).value - tr(t - h).value) / (2 * h);
      const double acc_fd = (tr(t + h).rate - tr(t - h).rate) / (2 * h);
      EXPECT_NEAR(p.rate, rate_fd, 1e-6 * std::max(1.0, std::abs(p.rate)));
      EXPECT_NEAR(p.accel, acc_fd, 1e-6 * std::max(1.0, std::abs(p.accel)));
    }
  }
}

TEST(Reference, CaseOneInitialErrors) {
  const Reference r = Reference::case1();
  EXPECT_NEAR(r.x(0).value, 3 * std::sin(kPi / 3), 1e-12);
  EXPECT_NEAR(r.x(0).value, 2.598, 1e-3);
  EXPECT_NEAR(r.y(0).value, -2.598, 1e-3);
  EXPECT_DOUBLE_EQ(r.z(10).value, -2.0);
  EXPECT_DOUBLE_EQ(r.psi(5).value, 0.0);
}

TEST(Reference, CaseTwoTargets) {
  const Reference r = Reference::case2();
  EXPECT_DOUBLE_EQ(r.x(3).value, 2.0);
  EXPECT_DOUBLE_EQ(r.y(3).value, 4.0);
  EXPECT_DOUBLE_EQ(r.z(10).value, -3.0);
  EXPECT_DOUBLE_EQ(r.z(10).rate, -0.3);
}
