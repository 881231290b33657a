#include "quadsr/types.hpp"

#include <algorithm>
#include <sstream>

namespace quadsr {

namespace {

void check_tilt(const char* name, double v) {
  if (!std::isfinite(v) || std::abs(v) >= kPi / 2) {
    std::ostringstream os;
    os << name << " = " << v << " rad outside (-pi/2, pi/2)";
    throw DomainError(os.str());
  }
}

void check_theta_margin(double theta) {
  if (!(std::abs(theta) < kPi / 2 - kSingularityMargin)) {
    std::ostringstream os;
    os << "gimbal singularity: theta = " << theta << " rad";
    throw SingularityError(os.str());
  }
}

}  // namespace

double wrap_angle(double a) {
  if (!std::isfinite(a)) return a;
  double r = std::fmod(a + kPi, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  r -= kPi;
  // fmod maps +pi to -pi; keep the interval half-open on the left
  if (r <= -kPi) r += 2 * kPi;
  return r;
}

void State::set_phi(double v) {
  check_tilt("phi", v);
  phi_ = v;
}

void State::set_theta(double v) {
  check_tilt("theta", v);
  theta_ = v;
}

void State::set_attitude(double phi, double theta, double psi) {
  set_phi(phi);
  set_theta(theta);
  set_psi(psi);
}

Vec12 State::to_vector() const {
  Vec12 v;
  v << x, y, z, vx, vy, vz, phi_, theta_, psi_, wx, wy, wz;
  return v;
}

State State::from_vector(const Vec12& v) {
  State s;
  s.x = v(0);
  s.y = v(1);
  s.z = v(2);
  s.vx = v(3);
  s.vy = v(4);
  s.vz = v(5);
  s.set_attitude(v(6), v(7), v(8));
  s.wx = v(9);
  s.wy = v(10);
  s.wz = v(11);
  return s;
}

bool State::is_finite() const { return to_vector().allFinite(); }

RotorCommand RotorCommand::saturated() const {
  RotorCommand out;
  for (std::size_t i = 0; i < 4; ++i) {
    // NaN maps to 0
    out.u[i] = std::isnan(u[i]) ? 0.0 : std::clamp(u[i], 0.0, kMaxRotorSpeed);
  }
  return out;
}

bool RotorCommand::within_limits() const {
  return std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.0 && v <= kMaxRotorSpeed; });
}

VirtualControl mix(const RotorCommand& u) {
  const double q1 = u[0] * u[0], q2 = u[1] * u[1], q3 = u[2] * u[2], q4 = u[3] * u[3];
  return {q1 + q2 + q3 + q4, q2 + q3 - q1 - q4, q1 + q3 - q2 - q4, q1 + q2 - q3 - q4};
}

Vec3 InnerState::body_rates() const {
  return euler_rate_transform_inverse(phi, theta) * Vec3(phidot, thetadot, psidot);
}

InnerState InnerState::from_state(const State& s) {
  const Vec3 rates = euler_rate_transform(s.phi(), s.theta()) * Vec3(s.wx, s.wy, s.wz);
  return {s.z, s.phi(), s.theta(), s.psi(), s.vz, rates(0), rates(1), rates(2)};
}

GainSet::GainSet(double kpx, double kix, double kpy, double kiy, const std::array<double, 8>& c)
    : kpx_(kpx), kix_(kix), kpy_(kpy), kiy_(kiy), c_(c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(kpx) || !positive(kix) || !positive(kpy) || !positive(kiy)) {
    throw std::invalid_argument("outer-loop gains must be strictly positive");
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!positive(c[i])) {
      throw std::invalid_argument("backstepping gain c" + std::to_string(i + 1) + " must be strictly positive");
    }
  }
}

GainSet GainSet::defaults() {
  return GainSet(5.0, 6.25, 5.0, 6.25, {11.52, 28.00, 16.63, 6.54, 8.40, 27.50, 15.54, 5.49});
}

void PlantParams::validate() const {
  for (double v : {m, g, Jxx, Jyy, Jzz, d, Ct, Cm}) {
    if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("plant parameters must be strictly positive");
  }
}

Trajectory Trajectory::constant(double value) {
  return Trajectory([value](double) { return RefPoint{value, 0.0, 0.0}; });
}

Trajectory Trajectory::ramp(double offset, double rate) {
  return Trajectory([offset, rate](double t) { return RefPoint{offset + rate * t, rate, 0.0}; });
}

Trajectory Trajectory::sine(double amplitude, double omega, double phase, double offset) {
  return Trajectory([=](double t) {
    const double a = omega * t + phase;
    return RefPoint{offset + amplitude * std::sin(a), amplitude * omega * std::cos(a),
                    -amplitude * omega * omega * std::sin(a)};
  });
}

Reference Reference::case1() {
  return {Trajectory::sine(3.0, 0.5, kPi / 3), Trajectory::sine(3.0, 0.5, -2 * kPi / 3), Trajectory::ramp(0.0, -0.2),
          Trajectory::constant(0.0)};
}

Reference Reference::case2() {
  return {Trajectory::constant(2.0), Trajectory::constant(4.0), Trajectory::ramp(0.0, -0.3), Trajectory::constant(0.0)};
}

Reference Reference::hold(const State& s) {
  return {Trajectory::constant(s.x), Trajectory::constant(s.y), Trajectory::constant(s.z),
          Trajectory::constant(s.psi())};
}

Mat3 euler_rate_transform(double phi, double theta) {
  check_theta_margin(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double ct = std::cos(theta), tt = std::tan(theta);
  Mat3 r;
  r << 1.0, sp * tt, cp * tt,
       0.0, cp, -sp,
       0.0, sp / ct, cp / ct;
  return r;
}

Mat3 euler_rate_transform_inverse(double phi, double theta) {
  check_theta_margin(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double st = std::sin(theta), ct = std::cos(theta);
  Mat3 r;
  r << 1.0, 0.0, -st,
       0.0, cp, sp * ct,
       0.0, -sp, cp * ct;
  return r;
}

Mat3 euler_rate_transform_dot(double phi, double theta, double phidot, double thetadot) {
  check_theta_margin(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double st = std::sin(theta), ct = std::cos(theta), tt = st / ct;
  const double sec2 = 1.0 / (ct * ct);
  Mat3 r;
  r << 0.0, cp * tt * phidot + sp * sec2 * thetadot, -sp * tt * phidot + cp * sec2 * thetadot,
       0.0, -sp * phidot, -cp * phidot,
       0.0, cp / ct * phidot + sp * st * sec2 * thetadot, -sp / ct * phidot + cp * st * sec2 * thetadot;
  return r;
}

}  // namespace quadsr
