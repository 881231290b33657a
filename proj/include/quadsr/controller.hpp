#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "quadsr/learned_model.hpp"
#include "quadsr/types.hpp"

namespace quadsr {

struct ControllerConfig {
  /// Control period; the command is held between updates.
  double dt = 0.005;
  /// |phi_d|, |theta_d| clamp.
  double tilt_limit = kPi / 2 - 0.05;
  /// Second-order command filter producing phi_d/theta_d derivatives.
  double filter_cutoff = 20.0;  // rad/s
  double filter_damping = 1.0;
  /// Outer-loop denominators below this hold the previous output.
  double denominator_eps = 1e-6;
  /// Slew limit on phi_d/theta_d in rad/s; infinity disables it.
  double tilt_rate_limit = std::numeric_limits<double>::infinity();

  void validate() const;
  bool operator==(const ControllerConfig&) const = default;

  /// Tilt clamp 0.4 rad and slew 2 rad/s, tuned for the case1/case2 scenarios.
  static ControllerConfig tuned() {
    ControllerConfig c;
    c.tilt_limit = 0.4;
    c.tilt_rate_limit = 2.0;
    return c;
  }
};

/// Degraded-mode bits reported in diagnostics.
enum ControlFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagArcsinSaturated = 1u << 0,
  kFlagRollHeld = 1u << 1,
  kFlagPitchHeld = 1u << 2,
  kFlagRollClamped = 1u << 3,
  kFlagPitchClamped = 1u << 4,
  kFlagNegativeSquare = 1u << 5,
  kFlagSpeedSaturated = 1u << 6,
  kFlagSingular = 1u << 7,
  kFlagRateLimited = 1u << 8,
};

/// Flags under which the inner-loop closed form no longer holds.
inline constexpr std::uint32_t kSaturationFlags = kFlagArcsinSaturated | kFlagRollHeld | kFlagPitchHeld |
                                                  kFlagRollClamped | kFlagPitchClamped | kFlagNegativeSquare |
                                                  kFlagSpeedSaturated | kFlagSingular;

// ---------------------------------------------------------------------------
// Outer loop: horizontal position -> desired roll and pitch.

struct OuterLoopOutput {
  double phi_d = 0, theta_d = 0;
  double ex = 0, ey = 0;
  /// Commanded horizontal accelerations kp*edot + ki*e + feedforward.
  double ax = 0, ay = 0;
  std::uint32_t flags = kFlagNone;
};

/// Explicit inversion of the identified zeta4/zeta5 for (phi_d, theta_d).
/// Uses the previous rotor command because the current one is not yet known.
class OuterLoop {
 public:
  OuterLoop(const GainSet& gains, const ControllerConfig& config) : gains_(gains), config_(config) {}

  OuterLoopOutput operator()(const State& state, const Reference& ref, const RotorCommand& u_prev, double t);
  void reset(double phi_d = 0.0, double theta_d = 0.0) {
    last_phi_d_ = phi_d;
    last_theta_d_ = theta_d;
  }

 private:
  GainSet gains_;
  ControllerConfig config_;
  double last_phi_d_ = 0.0, last_theta_d_ = 0.0;
};

// ---------------------------------------------------------------------------
// Inner loop: backstepping on s = [z phi theta psi zdot phidot thetadot psidot].

/// Per-channel reference value, rate and acceleration (z, phi, theta, psi).
struct InnerReference {
  Vec4 sd = Vec4::Zero();
  Vec4 sd_dot = Vec4::Zero();
  Vec4 sd_ddot = Vec4::Zero();
};

/// Targets for gamma_5..gamma_8 that make W_i-dot = -c_i e_i^2 - c_{i+4} delta_i^2:
///   gamma_{i+4} = (s_id - s_i) + sdd_id + c_i (sd_id - s_{i+4})
///               + c_{i+4} (sd_id + c_i (s_id - s_i) - s_{i+4}).
Vec4 backstepping_virtual(const InnerState& s, const InnerReference& ref, const GainSet& gains);

struct LyapunovTerms {
  std::array<double, 4> e{}, delta{}, V{}, W{}, W_dot{};
};

/// Tracking errors, virtual-control errors and the Lyapunov functions.
/// W_dot is the closed-loop value -c_i e_i^2 - c_{i+4} delta_i^2.
LyapunovTerms lyapunov_terms(const InnerState& s, const InnerReference& ref, const GainSet& gains);

/// Solves inner_dynamics(s, f) = gamma_targets for f.
/// f1 from the closed-form gamma_5 inversion, f2..f4 by a 3x3 solve.
VirtualControl solve_virtual_controls(const Vec4& gamma_targets, const InnerState& s);

struct Allocation {
  RotorCommand u;
  std::uint32_t flags = kFlagNone;
};

/// Inverts the mixing map f <- u^2. Negative squared speeds are clamped to 0
/// and speeds to [0, 1000], each raising a flag.
Allocation allocate(const VirtualControl& f);

/// Critically damped (by default) second-order filter yielding a smooth
/// signal with consistent first and second derivatives.
class CommandFilter {
 public:
  CommandFilter(double cutoff, double damping) : wn_(cutoff), zeta_(damping) {}

  void reset(double value) {
    pos_ = value;
    vel_ = 0.0;
    initialized_ = true;
  }
  bool initialized() const { return initialized_; }
  /// Advances by dt with `input` held, returns (value, rate, acceleration).
  RefPoint update(double input, double dt);

 private:
  double wn_, zeta_;
  double pos_ = 0.0, vel_ = 0.0;
  bool initialized_ = false;
};

struct Diagnostics {
  double t = 0;
  double ex = 0, ey = 0, ez = 0, epsi = 0;
  double phi_d = 0, theta_d = 0;
  VirtualControl f;
  RotorCommand u;
  LyapunovTerms lyapunov;
  std::uint32_t flags = kFlagNone;
};

/// Outer PI -> command filter -> backstepping -> virtual-control solve ->
/// allocation, run once per control period.
class HierarchicalController {
 public:
  HierarchicalController(const GainSet& gains, const ControllerConfig& config,
                         const RotorCommand& initial = RotorCommand::uniform(hover_speed()));

  /// Computes the next rotor command. Never throws on numerical trouble;
  /// a singular attitude keeps the previous command and sets flags.
  Diagnostics step(const State& state, const Reference& ref, double t);

  const RotorCommand& last_command() const { return u_prev_; }
  const GainSet& gains() const { return gains_; }
  const ControllerConfig& config() const { return config_; }

  /// Equal rotor speeds that balance the identified vertical dynamics.
  static double hover_speed();

 private:
  GainSet gains_;
  ControllerConfig config_;
  OuterLoop outer_;
  CommandFilter roll_filter_, pitch_filter_;
  RotorCommand u_prev_;
};

// ---------------------------------------------------------------------------
// Closed loop

struct TrackRecord {
  double t = 0;
  State state;
  double xd = 0, yd = 0, zd = 0, psid = 0;
  Diagnostics diag;
};

struct TrackResult {
  std::vector<TrackRecord> records;
  bool failed = false;
  std::string error;
};

using Dynamics = std::function<Vec12(const Vec12&, const RotorCommand&)>;

/// Runs the controller against `plant` from `initial`. The plant integrates
/// with RK4 at plant_dt under a zero-order hold of the rotor command; one
/// record is stored per control period.
TrackResult simulate_tracking(const Dynamics& plant, HierarchicalController& controller, const Reference& ref,
                              const State& initial, double duration, double plant_dt);

}  // namespace quadsr
