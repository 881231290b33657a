#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace quadsr {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kMaxRotorSpeed = 1000.0;  // rad/s
inline constexpr double kSingularityMargin = 1e-6;

/// Raised when a quantity falls outside the domain of a model.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pitch close enough to +-pi/2 that the Euler-rate transform blows up.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Full 12-dimensional rigid-body state.
///
/// Position and velocity are in the inertial frame with gravity along +Z.
/// Roll and pitch are physically limited to (-pi/2, pi/2) and are rejected
/// outside it; yaw is periodic and is wrapped into (-pi, pi] on write.
class State {
 public:
  double x = 0, y = 0, z = 0;
  double vx = 0, vy = 0, vz = 0;
  double wx = 0, wy = 0, wz = 0;

  State() = default;

  double phi() const { return phi_; }
  double theta() const { return theta_; }
  double psi() const { return psi_; }

  void set_phi(double v);
  void set_theta(double v);
  void set_psi(double v) { psi_ = wrap_angle(v); }
  void set_attitude(double phi, double theta, double psi);

  /// Layout [x y z vx vy vz phi theta psi wx wy wz].
  Vec12 to_vector() const;
  static State from_vector(const Vec12& v);

  bool is_finite() const;

 private:
  double phi_ = 0, theta_ = 0, psi_ = 0;
};

/// Four rotor speeds in rad/s.
struct RotorCommand {
  std::array<double, 4> u{0.0, 0.0, 0.0, 0.0};

  RotorCommand() = default;
  RotorCommand(double u1, double u2, double u3, double u4) : u{u1, u2, u3, u4} {}

  double operator[](std::size_t i) const { return u[i]; }
  double& operator[](std::size_t i) { return u[i]; }

  /// Every speed clamped to [0, kMaxRotorSpeed].
  RotorCommand saturated() const;
  bool within_limits() const;
  static RotorCommand uniform(double speed) { return {speed, speed, speed, speed}; }

  bool operator==(const RotorCommand&) const = default;
};

/// Thrust and moment proxies in squared rotor speed units.
struct VirtualControl {
  double f1 = 0, f2 = 0, f3 = 0, f4 = 0;

  /// Necessary condition for nonnegative squared speeds.
  bool feasible() const {
    return f1 >= 0 && f1 >= std::abs(f2) && f1 >= std::abs(f3) && f1 >= std::abs(f4);
  }
  Vec4 to_vector() const { return {f1, f2, f3, f4}; }
  static VirtualControl from_vector(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
};

/// Forward map u -> f: f1 = sum u^2, f2 = u2^2+u3^2-u1^2-u4^2,
/// f3 = u1^2+u3^2-u2^2-u4^2, f4 = u1^2+u2^2-u3^2-u4^2.
VirtualControl mix(const RotorCommand& u);

/// Altitude/attitude subsystem coordinates
/// s = [z phi theta psi zdot phidot thetadot psidot].
struct InnerState {
  double z = 0, phi = 0, theta = 0, psi = 0;
  double zdot = 0, phidot = 0, thetadot = 0, psidot = 0;

  Vec8 to_vector() const { return (Vec8() << z, phi, theta, psi, zdot, phidot, thetadot, psidot).finished(); }
  static InnerState from_vector(const Vec8& s) { return {s(0), s(1), s(2), s(3), s(4), s(5), s(6), s(7)}; }
  Vec3 body_rates() const;
  static InnerState from_state(const State& s);
};

/// Outer PI gains and the eight backstepping gains. All strictly positive.
class GainSet {
 public:
  GainSet(double kpx, double kix, double kpy, double kiy, const std::array<double, 8>& c);

  double kpx() const { return kpx_; }
  double kix() const { return kix_; }
  double kpy() const { return kpy_; }
  double kiy() const { return kiy_; }
  /// Backstepping gain c_i with 1-based index.
  double c(int i) const { return c_.at(static_cast<std::size_t>(i - 1)); }
  const std::array<double, 8>& c_all() const { return c_; }

  /// Reference backstepping gains c1..c8 with tuned outer PI gains.
  static GainSet defaults();

  bool operator==(const GainSet&) const = default;

 private:
  double kpx_, kix_, kpy_, kiy_;
  std::array<double, 8> c_;
};

/// Rigid-body parameters of the airframe.
struct PlantParams {
  double m = 1.4;
  double g = 9.8;
  double Jxx = 0.0211;
  double Jyy = 0.0219;
  double Jzz = 0.0366;
  double d = 0.2250;
  double Ct = 1.105e-5;
  double Cm = 1.779e-7;

  void validate() const;
  bool operator==(const PlantParams&) const = default;
};

/// Value and first two time derivatives of a scalar reference.
struct RefPoint {
  double value = 0, rate = 0, accel = 0;
};

/// Scalar reference trajectory with analytic derivatives.
class Trajectory {
 public:
  using Fn = std::function<RefPoint(double)>;

  Trajectory() : fn_([](double) { return RefPoint{}; }) {}
  explicit Trajectory(Fn fn) : fn_(std::move(fn)) {}

  RefPoint operator()(double t) const { return fn_(t); }

  static Trajectory constant(double value);
  static Trajectory ramp(double offset, double rate);
  /// offset + amplitude * sin(omega t + phase)
  static Trajectory sine(double amplitude, double omega, double phase, double offset = 0.0);

 private:
  Fn fn_;
};

/// Desired x, y, z and yaw trajectories.
struct Reference {
  Trajectory x, y, z, psi;

  static Reference case1();
  static Reference case2();
  static Reference hold(const State& s);
};

// Euler-rate transform: [phidot thetadot psidot]^T = R(phi, theta) [wx wy wz]^T.
Mat3 euler_rate_transform(double phi, double theta);
Mat3 euler_rate_transform_inverse(double phi, double theta);
Mat3 euler_rate_transform_dot(double phi, double theta, double phidot, double thetadot);

}  // namespace quadsr
