#include "quadsr/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "quadsr/plant.hpp"

namespace quadsr {

using namespace learned;

void ControllerConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("controller dt must be positive");
  if (!(tilt_limit > 0) || !(tilt_limit < kPi / 2)) throw std::invalid_argument("tilt_limit must lie in (0, pi/2)");
  if (!(filter_cutoff > 0) || !(filter_damping > 0)) throw std::invalid_argument("filter parameters must be positive");
  if (!(denominator_eps > 0)) throw std::invalid_argument("denominator_eps must be positive");
  if (!(tilt_rate_limit > 0)) throw std::invalid_argument("tilt_rate_limit must be positive");
}

// ---------------------------------------------------------------------------
// Outer loop

OuterLoopOutput OuterLoop::operator()(const State& state, const Reference& ref, const RotorCommand& u_prev,
                                      double t) {
  OuterLoopOutput out;
  const RefPoint rx = ref.x(t), ry = ref.y(t);
  out.ex = rx.value - state.x;
  out.ey = ry.value - state.y;
  out.ax = gains_.kpx() * (rx.rate - state.vx) + gains_.kix() * out.ex + rx.accel;
  out.ay = gains_.kpy() * (ry.rate - state.vy) + gains_.kiy() * out.ey + ry.accel;

  const double u1 = u_prev[0], u2 = u_prev[1], u3 = u_prev[2], u4 = u_prev[3];
  const double psi = state.psi();
  const double lim = config_.tilt_limit;

  const double den_y = kYRotor1 * u1 * u1 + kYRotors * u2 * u2 + kYRotors * u3 * u3 + kYRotors * u4 * u4;
  double phi_d = last_phi_d_;
  if (den_y < config_.denominator_eps) {
    out.flags |= kFlagRollHeld;
  } else {
    double arg = (out.ay + kYBias) / den_y;
    if (std::abs(arg) > 1.0) {
      arg = std::clamp(arg, -1.0, 1.0);
      out.flags |= kFlagArcsinSaturated;
    }
    phi_d = std::asin(arg) - psi;
  }
  if (std::abs(phi_d) > lim) {
    phi_d = std::clamp(phi_d, -lim, lim);
    out.flags |= kFlagRollClamped;
  }

  const double sps = std::sin(phi_d) * std::sin(psi);
  const double cpc = std::cos(phi_d) * std::cos(psi);
  const double den_x = -kXPitch * u1 * cpc - kXBilinear * u2 * u4 * cpc;
  double theta_d = last_theta_d_;
  if (std::abs(den_x) < config_.denominator_eps) {
    out.flags |= kFlagPitchHeld;
  } else {
    theta_d = (out.ax + kXRollYaw * u1 * sps + kXBilinear * u2 * u4 * sps) / den_x;
  }
  if (std::abs(theta_d) > lim) {
    theta_d = std::clamp(theta_d, -lim, lim);
    out.flags |= kFlagPitchClamped;
  }

  const double step = config_.tilt_rate_limit * config_.dt;
  auto slew = [&](double target, double last) {
    if (std::abs(target - last) <= step) return target;
    out.flags |= kFlagRateLimited;
    return target > last ? last + step : last - step;
  };
  out.phi_d = last_phi_d_ = slew(phi_d, last_phi_d_);
  out.theta_d = last_theta_d_ = slew(theta_d, last_theta_d_);
  return out;
}

// ---------------------------------------------------------------------------
// Backstepping

Vec4 backstepping_virtual(const InnerState& s, const InnerReference& ref, const GainSet& gains) {
  const Vec8 sv = s.to_vector();
  Vec4 gamma;
  for (int i = 0; i < 4; ++i) {
    const double ci = gains.c(i + 1), ci4 = gains.c(i + 5);
    const double sd = ref.sd(i), sd_dot = ref.sd_dot(i), sd_ddot = ref.sd_ddot(i);
    gamma(i) = (sd - sv(i)) + sd_ddot + ci * (sd_dot - sv(i + 4)) + ci4 * (sd_dot + ci * (sd - sv(i)) - sv(i + 4));
  }
  return gamma;
}

LyapunovTerms lyapunov_terms(const InnerState& s, const InnerReference& ref, const GainSet& gains) {
  const Vec8 sv = s.to_vector();
  LyapunovTerms l;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double ci = gains.c(static_cast<int>(i) + 1), ci4 = gains.c(static_cast<int>(i) + 5);
    const double e = ref.sd(k) - sv(k);
    const double virt = ref.sd_dot(k) + ci * e;  // s_{(i+4)d}
    const double delta = virt - sv(k + 4);
    l.e[i] = e;
    l.delta[i] = delta;
    l.V[i] = 0.5 * e * e;
    l.W[i] = 0.5 * e * e + 0.5 * delta * delta;
    l.W_dot[i] = -ci * e * e - ci4 * delta * delta;
  }
  return l;
}

VirtualControl solve_virtual_controls(const Vec4& gamma_targets, const InnerState& s) {
  if (!(std::abs(s.phi) < kPi / 2 - kSingularityMargin)) {
    std::ostringstream os;
    os << "thrust inversion singular: phi = " << s.phi << ", theta = " << s.theta;
    throw SingularityError(os.str());
  }
  const InnerAffine a = inner_affine(s);  // throws on theta singularity

  VirtualControl f;
  // closed form: (gamma_5 - 9.44 + 0.000289 s5^2) / (-6.9e-6 cos s2)
  f.f1 = (gamma_targets(0) - a.drift5) / a.gain5;

  Eigen::FullPivLU<Mat3> lu(a.gain);
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "attitude moment map singular at phi = " << s.phi << ", theta = " << s.theta;
    throw SingularityError(os.str());
  }
  const Vec3 rest = lu.solve(gamma_targets.tail<3>() - a.drift);
  f.f2 = rest(0);
  f.f3 = rest(1);
  f.f4 = rest(2);
  return f;
}

Allocation allocate(const VirtualControl& f) {
  // the mixing matrix has orthogonal rows of norm 2, so its inverse is M^T / 4
  const std::array<double, 4> sq = {(f.f1 - f.f2 + f.f3 + f.f4) / 4, (f.f1 + f.f2 - f.f3 + f.f4) / 4,
                                    (f.f1 + f.f2 + f.f3 - f.f4) / 4, (f.f1 - f.f2 - f.f3 - f.f4) / 4};
  Allocation out;
  for (std::size_t i = 0; i < 4; ++i) {
    double q = sq[i];
    if (!(q >= 0.0)) {
      q = 0.0;
      out.flags |= kFlagNegativeSquare;
    }
    double u = std::sqrt(q);
    if (u > kMaxRotorSpeed) {
      u = kMaxRotorSpeed;
      out.flags |= kFlagSpeedSaturated;
    }
    out.u[i] = u;
  }
  return out;
}

RefPoint CommandFilter::update(double input, double dt) {
  auto accel = [&](double p, double v) { return wn_ * wn_ * (input - p) - 2.0 * zeta_ * wn_ * v; };
  const RefPoint now{pos_, vel_, accel(pos_, vel_)};

  // RK4 over one hold interval
  const double k1p = vel_, k1v = accel(pos_, vel_);
  const double k2p = vel_ + dt / 2 * k1v, k2v = accel(pos_ + dt / 2 * k1p, vel_ + dt / 2 * k1v);
  const double k3p = vel_ + dt / 2 * k2v, k3v = accel(pos_ + dt / 2 * k2p, vel_ + dt / 2 * k2v);
  const double k4p = vel_ + dt * k3v, k4v = accel(pos_ + dt * k3p, vel_ + dt * k3v);
  pos_ += dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
  vel_ += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  return now;
}

// ---------------------------------------------------------------------------
// Full controller

double HierarchicalController::hover_speed() { return std::sqrt(kZGravity / (4.0 * kZThrust)); }

HierarchicalController::HierarchicalController(const GainSet& gains, const ControllerConfig& config,
                                               const RotorCommand& initial)
    : gains_(gains),
      config_(config),
      outer_(gains, config),
      roll_filter_(config.filter_cutoff, config.filter_damping),
      pitch_filter_(config.filter_cutoff, config.filter_damping),
      u_prev_(initial.saturated()) {
  config_.validate();
}

Diagnostics HierarchicalController::step(const State& state, const Reference& ref, double t) {
  Diagnostics d;
  d.t = t;

  const OuterLoopOutput ol = outer_(state, ref, u_prev_, t);
  d.flags |= ol.flags;
  d.ex = ol.ex;
  d.ey = ol.ey;
  d.phi_d = ol.phi_d;
  d.theta_d = ol.theta_d;

  if (!roll_filter_.initialized()) {
    roll_filter_.reset(state.phi());
    pitch_filter_.reset(state.theta());
  }
  const RefPoint roll = roll_filter_.update(ol.phi_d, config_.dt);
  const RefPoint pitch = pitch_filter_.update(ol.theta_d, config_.dt);
  const RefPoint rz = ref.z(t), rpsi = ref.psi(t);

  InnerReference ir;
  // yaw reference unwrapped next to the current heading
  const double psi_ref = state.psi() + wrap_angle(rpsi.value - state.psi());
  ir.sd << rz.value, roll.value, pitch.value, psi_ref;
  ir.sd_dot << rz.rate, roll.rate, pitch.rate, rpsi.rate;
  ir.sd_ddot << rz.accel, roll.accel, pitch.accel, rpsi.accel;

  const InnerState s = InnerState::from_state(state);
  d.lyapunov = lyapunov_terms(s, ir, gains_);
  d.ez = d.lyapunov.e[0];
  d.epsi = d.lyapunov.e[3];

  try {
    const Vec4 gamma = backstepping_virtual(s, ir, gains_);
    d.f = solve_virtual_controls(gamma, s);
    const Allocation alloc = allocate(d.f);
    d.flags |= alloc.flags;
    u_prev_ = alloc.u;
  } catch (const SingularityError&) {
    d.flags |= kFlagSingular;
    d.f = mix(u_prev_);
  }
  d.u = u_prev_;
  return d;
}

// ---------------------------------------------------------------------------
// Closed loop

TrackResult simulate_tracking(const Dynamics& plant, HierarchicalController& controller, const Reference& ref,
                              const State& initial, double duration, double plant_dt) {
  const double ctrl_dt = controller.config().dt;
  const auto substeps = std::llround(ctrl_dt / plant_dt);
  if (substeps < 1 || std::abs(static_cast<double>(substeps) * plant_dt - ctrl_dt) > 1e-12) {
    throw std::invalid_argument("controller period must be an integer multiple of the plant step");
  }
  const auto steps = std::llround(duration / ctrl_dt);

  TrackResult result;
  result.records.reserve(static_cast<std::size_t>(steps) + 1);
  Vec12 x = initial.to_vector();

  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * ctrl_dt;
    State state;
    try {
      if (!x.allFinite()) throw DomainError("non-finite state");
      if (!(std::abs(x(7)) < kPi / 2 - kSingularityMargin)) throw SingularityError("pitch reached gimbal lock");
      state = State::from_vector(x);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os << "closed loop aborted at t = " << t << ": " << e.what();
      result.failed = true;
      result.error = os.str();
      return result;
    }

    TrackRecord rec;
    rec.t = t;
    rec.state = state;
    rec.xd = ref.x(t).value;
    rec.yd = ref.y(t).value;
    rec.zd = ref.z(t).value;
    rec.psid = ref.psi(t).value;
    rec.diag = controller.step(state, ref, t);
    result.records.push_back(rec);
    if (k == steps) break;

    const RotorCommand u = rec.diag.u.saturated();
    const StateFn f = [&](double, const Vec12& xi) { return plant(xi, u); };
    try {
      for (long long j = 0; j < substeps; ++j) {
        x = rk4_step(f, t + static_cast<double>(j) * plant_dt, x, plant_dt);
        x(8) = wrap_angle(x(8));
      }
    } catch (const DomainError& e) {
      std::ostringstream os;
      os << "closed loop aborted after t = " << t << ": " << e.what();
      result.failed = true;
      result.error = os.str();
      return result;
    }
  }
  return result;
}

}  // namespace quadsr
