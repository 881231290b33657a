#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "quadsr/types.hpp"

namespace quadsr {

/// Integration produced a non-finite or singular state.
class IntegrationError : public DomainError {
 public:
  IntegrationError(const std::string& what, double t) : DomainError(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// X-configuration rigid-body quadrotor used as ground truth.
///
/// Thrust Ct*sum(u^2) along -Z_body, roll/pitch moments (Ct*d/sqrt 2) times
/// the f2/f3 mixes, yaw moment Cm*f4. Gravity acts along +Z_inertial.
/// Translational extras: quadratic vertical drag -k_z*vz^2 and a constant
/// lateral bias on ydd.
struct PlantModel {
  PlantParams params;
  /// Vertical drag as an acceleration coefficient (1/m).
  double vertical_drag = 0.000289;
  /// Constant lateral acceleration subtracted from ydd (m/s^2).
  double lateral_bias = 0.0441;
  /// +1: J wdot = tau + w x (J w), the body-axis handedness whose gyroscopic
  /// signs match the identified model. -1: textbook J wdot = tau - w x (J w).
  int gyro_sign = +1;

  /// xi-dot in the State vector layout.
  Vec12 derivative(const Vec12& xi, const RotorCommand& u) const;
  Vec12 derivative(const State& s, const RotorCommand& u) const { return derivative(s.to_vector(), u); }

  /// Gyroscopic inertia ratios multiplying (wy wz, wx wz, wx wy) in wdot.
  Vec3 gyro_coefficients() const;
  /// Rotor speed at which every rotor together balances gravity.
  double hover_speed() const;
};

inline Vec12 plant_derivative(const State& s, const RotorCommand& u, const PlantParams& p) {
  PlantModel m;
  m.params = p;
  return m.derivative(s, u);
}

/// One row of a generated data set: state, applied input and the nine
/// labelled derivatives (xdd, ydd, zdd, phidot, thetadot, psidot, wxdot,
/// wydot, wzdot).
struct Sample {
  double t = 0;
  State state;
  RotorCommand input;
  Vec9 derivs = Vec9::Zero();
};

/// Labels a (state, input) pair from a 12-vector derivative.
Vec9 derivative_labels(const Vec12& xi_dot);

using InputFn = std::function<RotorCommand(double)>;
using StateFn = std::function<Vec12(double, const Vec12&)>;

/// One classical RK4 step of a time-varying system.
Vec12 rk4_step(const StateFn& f, double t, const Vec12& x, double dt);

/// Fixed-step RK4 under the plant, one Sample per step including t = 0.
/// Inputs are saturated to [0, 1000] rad/s before use.
std::vector<Sample> integrate(const PlantModel& model, const State& state0, const InputFn& input, double t_end,
                              double dt);

/// Rotor excitation signals.
class Excitation {
 public:
  virtual ~Excitation() = default;
  virtual RotorCommand operator()(double t) const = 0;
};

/// u_i = 300 + 300 sin(10 t + p_i) with p = (0, pi/4, pi/3, pi/6).
class TestSinusoid final : public Excitation {
 public:
  RotorCommand operator()(double t) const override;
};

/// Seeded piecewise-constant speeds drawn uniformly from [lo, hi] and held
/// for `dwell` seconds.
class RandomUniform final : public Excitation {
 public:
  RandomUniform(double lo, double hi, std::uint64_t seed, double dwell = 0.05, double horizon = 60.0);
  RotorCommand operator()(double t) const override;

  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_, dwell_;
  std::vector<RotorCommand> table_;
};

struct DatasetOptions {
  double duration = 10.0;
  double sample_dt = 0.005;
  double dt = 0.001;
  std::uint64_t seed = 1;
  /// Gaussian noise added to the labels; 0 disables.
  double noise_sigma = 0.0;
  /// Attitude envelope; leaving it re-draws attitude, rates and velocity.
  double tilt_envelope = 1.0;
  double speed_envelope = 30.0;
};

/// Samples the plant under an excitation at a uniform sample_dt.
///
/// Random excitation spins the airframe quickly, so whenever roll or pitch
/// leave the envelope the rotational state and velocity are re-drawn from
/// the seeded generator (position is kept). Labels are the analytic plant
/// derivatives at each sampled (state, input).
std::vector<Sample> generate_dataset(const PlantModel& model, const Excitation& excitation,
                                     const DatasetOptions& opts);

/// Initial state whose attitude and body rates are zero-mean over one period
/// of the test sinusoid, so the airframe oscillates instead of tumbling.
State periodic_trim_state(const PlantModel& model, const Excitation& excitation, double period,
                          int iterations = 4);

/// Initial attitude and body rates minimizing mean squared roll and pitch,
/// sampled every `sample_dt`, over the whole `horizon` of the excitation.
/// Starts from periodic_trim_state and extends the horizon in 2 s steps.
State horizon_trim_state(const PlantModel& model, const Excitation& excitation, double horizon,
                         double sample_dt = 0.05);

}  // namespace quadsr
