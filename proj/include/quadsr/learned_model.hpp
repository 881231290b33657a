#pragma once

#include <array>
#include <string>
#include <vector>

#include "quadsr/expr.hpp"
#include "quadsr/types.hpp"

namespace quadsr {

/// Identified coefficients of the nine dynamic channels zeta_4..zeta_12.
namespace learned {
inline constexpr double kXRollYaw = 0.00768;      // zeta4: u1 sin(phi) sin(psi)
inline constexpr double kXBilinear = 1.63e-5;     // zeta4: u2 u4 terms
inline constexpr double kXPitch = 0.00665;        // zeta4: theta u1 cos(phi) cos(psi)
inline constexpr double kYRotor1 = 7.87e-6;       // zeta5: u1^2 sin(phi + psi)
inline constexpr double kYRotors = 7.78e-6;       // zeta5: u2^2, u3^2, u4^2
inline constexpr double kYBias = 0.0441;          // zeta5 constant
inline constexpr double kZGravity = 9.44;         // zeta6 constant
inline constexpr double kZThrust = 6.90e-6;       // zeta6: cos(phi) sum u^2
inline constexpr double kZDrag = 0.000289;        // zeta6: vz^2
inline constexpr double kGyroX = 0.697;           // zeta10: wy wz
inline constexpr double kRollGain = 8.33e-5;      // zeta10: f2
inline constexpr double kGyroY = -0.708;          // zeta11: wx wz
inline constexpr double kPitchGain = 8.03e-5;     // zeta11: f3
inline constexpr double kGyroZ = 0.0219;          // zeta12: wx wy
inline constexpr double kYawGain = 4.86e-6;       // zeta12: f4
}  // namespace learned

/// Variable names of the standard feature vector [state(12), u1..u4].
const std::vector<std::string>& standard_feature_names();
std::array<double, 16> standard_features(const State& s, const RotorCommand& u);

/// The identified analytic model as a value type.
///
/// `zeta(i, ...)` evaluates the hand-coded channel; `tree(i)` holds the same
/// equation as an ExprTree over the standard features so it can be rendered,
/// diffed against a fresh fit, or evaluated by the SR machinery.
class LearnedModel {
 public:
  LearnedModel();

  /// Channel index 4..12.
  double zeta(int i, const State& s, const RotorCommand& u) const;
  const sr::ExprTree& tree(int i) const { return trees_.at(static_cast<std::size_t>(i - 4)); }
  static std::string expression(int i);

  /// xi-dot: kinematic rows copy velocity, dynamic rows from zeta_4..zeta_12.
  Vec12 derivative(const State& s, const RotorCommand& u) const;
  Vec12 derivative(const Vec12& xi, const RotorCommand& u) const;

 private:
  std::vector<sr::ExprTree> trees_;
};

inline Vec12 learned_derivative(const State& s, const RotorCommand& u) {
  static const LearnedModel model;
  return model.derivative(s, u);
}

/// gamma_5..gamma_8 are affine in f:
///   gamma_5 = drift5 + gain5 * f1
///   [gamma_6 gamma_7 gamma_8] = drift + gain * [f2 f3 f4]
struct InnerAffine {
  double drift5 = 0, gain5 = 0;
  Vec3 drift = Vec3::Zero();
  Mat3 gain = Mat3::Zero();
};

/// Learned dynamics rewritten in s-coordinates: body rates recovered with
/// R^-1, Euler accelerations from R * wdot + Rdot * w.
InnerAffine inner_affine(const InnerState& s);

/// s-dot = [s5 s6 s7 s8 gamma_5 gamma_6 gamma_7 gamma_8].
Vec8 inner_dynamics(const InnerState& s, const VirtualControl& f);

}  // namespace quadsr
