#include "quadsr/learned_model.hpp"

#include <cmath>

namespace quadsr {

using namespace learned;

const std::vector<std::string>& standard_feature_names() {
  static const std::vector<std::string> names = {"x",   "y",     "z",   "vx", "vy", "vz", "phi", "theta",
                                                 "psi", "wx",    "wy",  "wz", "u1", "u2", "u3", "u4"};
  return names;
}

std::array<double, 16> standard_features(const State& s, const RotorCommand& u) {
  return {s.x,   s.y,  s.z,  s.vx, s.vy, s.vz, s.phi(), s.theta(),
          s.psi(), s.wx, s.wy, s.wz, u[0], u[1], u[2],   u[3]};
}

// Operation order in the texts matches the hand-coded channels below, so
// both routes round identically.
std::string LearnedModel::expression(int i) {
  switch (i) {
    case 4:
      return "-0.00768*u1*sin(phi)*sin(psi) - 1.63e-5*u2*u4*sin(phi)*sin(psi)"
             " - 0.00665*theta*u1*cos(phi)*cos(psi) - 1.63e-5*theta*u2*u4*cos(phi)*cos(psi)";
    case 5:
      return "7.87e-6*u1^2*sin(phi + psi) + 7.78e-6*u2^2*sin(phi + psi) + 7.78e-6*u3^2*sin(phi + psi)"
             " + 7.78e-6*u4^2*sin(phi + psi) - 0.0441";
    case 6: return "9.44 - 6.9e-6*cos(phi)*(u1^2 + u2^2 + u3^2 + u4^2) - 0.000289*vz^2";
    case 7: return "sin(phi)*(sin(theta)/cos(theta))*wy + cos(phi)*(sin(theta)/cos(theta))*wz + wx";
    case 8: return "cos(phi)*wy - sin(phi)*wz";
    case 9: return "sin(phi)/cos(theta)*wy + cos(phi)/cos(theta)*wz";
    case 10: return "0.697*wy*wz + 8.33e-5*(u2^2 + u3^2 - u1^2 - u4^2)";
    case 11: return "-0.708*wx*wz + 8.03e-5*(u1^2 + u3^2 - u2^2 - u4^2)";
    case 12: return "0.0219*wx*wy + 4.86e-6*(u1^2 + u2^2 - u3^2 - u4^2)";
    default: throw std::out_of_range("learned channel index must be 4..12");
  }
}

LearnedModel::LearnedModel() {
  for (int i = 4; i <= 12; ++i) trees_.push_back(sr::parse_expr(expression(i), standard_feature_names()));
}

double LearnedModel::zeta(int i, const State& s, const RotorCommand& u) const {
  const double phi = s.phi(), theta = s.theta(), psi = s.psi();
  const double u1 = u[0], u2 = u[1], u3 = u[2], u4 = u[3];
  const double wx = s.wx, wy = s.wy, wz = s.wz;
  switch (i) {
    case 4:
      return -kXRollYaw * u1 * std::sin(phi) * std::sin(psi) - kXBilinear * u2 * u4 * std::sin(phi) * std::sin(psi) -
             kXPitch * theta * u1 * std::cos(phi) * std::cos(psi) -
             kXBilinear * theta * u2 * u4 * std::cos(phi) * std::cos(psi);
    case 5:
      return kYRotor1 * (u1 * u1) * std::sin(phi + psi) + kYRotors * (u2 * u2) * std::sin(phi + psi) +
             kYRotors * (u3 * u3) * std::sin(phi + psi) + kYRotors * (u4 * u4) * std::sin(phi + psi) - kYBias;
    case 6:
      return kZGravity - kZThrust * std::cos(phi) * (u1 * u1 + u2 * u2 + u3 * u3 + u4 * u4) - kZDrag * (s.vz * s.vz);
    case 7:
      return std::sin(phi) * (std::sin(theta) / std::cos(theta)) * wy +
             std::cos(phi) * (std::sin(theta) / std::cos(theta)) * wz + wx;
    case 8: return std::cos(phi) * wy - std::sin(phi) * wz;
    case 9: return std::sin(phi) / std::cos(theta) * wy + std::cos(phi) / std::cos(theta) * wz;
    case 10: return kGyroX * wy * wz + kRollGain * (u2 * u2 + u3 * u3 - u1 * u1 - u4 * u4);
    case 11: return kGyroY * wx * wz + kPitchGain * (u1 * u1 + u3 * u3 - u2 * u2 - u4 * u4);
    case 12: return kGyroZ * wx * wy + kYawGain * (u1 * u1 + u2 * u2 - u3 * u3 - u4 * u4);
    default: throw std::out_of_range("learned channel index must be 4..12");
  }
}

Vec12 LearnedModel::derivative(const State& s, const RotorCommand& u) const {
  if (!(std::abs(s.theta()) < kPi / 2 - kSingularityMargin)) {
    throw SingularityError("learned model: cos(theta) vanishes");
  }
  Vec12 out;
  out(0) = s.vx;
  out(1) = s.vy;
  out(2) = s.vz;
  for (int i = 4; i <= 12; ++i) out(i - 1) = zeta(i, s, u);
  return out;
}

Vec12 LearnedModel::derivative(const Vec12& xi, const RotorCommand& u) const {
  return derivative(State::from_vector(xi), u);
}

InnerAffine inner_affine(const InnerState& s) {
  const Mat3 r = euler_rate_transform(s.phi, s.theta);
  const Mat3 r_dot = euler_rate_transform_dot(s.phi, s.theta, s.phidot, s.thetadot);
  const Vec3 w = s.body_rates();

  InnerAffine a;
  a.drift5 = kZGravity - kZDrag * s.zdot * s.zdot;
  a.gain5 = -kZThrust * std::cos(s.phi);

  const Vec3 gyro(kGyroX * w(1) * w(2), kGyroY * w(0) * w(2), kGyroZ * w(0) * w(1));
  a.drift = r * gyro + r_dot * w;
  a.gain = r * Vec3(kRollGain, kPitchGain, kYawGain).asDiagonal();
  return a;
}

Vec8 inner_dynamics(const InnerState& s, const VirtualControl& f) {
  const InnerAffine a = inner_affine(s);
  Vec8 out;
  out << s.zdot, s.phidot, s.thetadot, s.psidot, a.drift5 + a.gain5 * f.f1,
      a.drift + a.gain * Vec3(f.f2, f.f3, f.f4);
  return out;
}

}  // namespace quadsr
