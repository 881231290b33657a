#include "quadsr/plant.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

namespace quadsr {

Vec12 PlantModel::derivative(const Vec12& xi, const RotorCommand& u) const {
  const PlantParams& p = params;
  const double phi = xi(6), theta = xi(7), psi = xi(8);
  const Vec3 w = xi.segment<3>(9);

  const VirtualControl f = mix(u);
  const double thrust_acc = p.Ct * f.f1 / p.m;

  const double sp = std::sin(phi), cp = std::cos(phi);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double ss = std::sin(psi), cs = std::cos(psi);

  Vec12 out;
  out.head<3>() = xi.segment<3>(3);
  // thrust along -Z_body rotated into the inertial frame (ZYX Euler angles)
  out(3) = -thrust_acc * (cs * st * cp + ss * sp);
  out(4) = thrust_acc * (cs * sp - ss * st * cp) - lateral_bias;
  out(5) = p.g - thrust_acc * cp * ct - vertical_drag * xi(5) * xi(5);

  out.segment<3>(6) = euler_rate_transform(phi, theta) * w;

  const double arm = p.Ct * p.d / std::sqrt(2.0);
  const Vec3 tau(arm * f.f2, arm * f.f3, p.Cm * f.f4);
  const Vec3 jw(p.Jxx * w(0), p.Jyy * w(1), p.Jzz * w(2));
  const Vec3 net = tau + static_cast<double>(gyro_sign) * w.cross(jw);
  out(9) = net(0) / p.Jxx;
  out(10) = net(1) / p.Jyy;
  out(11) = net(2) / p.Jzz;
  return out;
}

Vec3 PlantModel::gyro_coefficients() const {
  const PlantParams& p = params;
  const double s = -static_cast<double>(gyro_sign);
  return {s * (p.Jyy - p.Jzz) / p.Jxx, s * (p.Jzz - p.Jxx) / p.Jyy, s * (p.Jxx - p.Jyy) / p.Jzz};
}

double PlantModel::hover_speed() const { return std::sqrt(params.m * params.g / (4.0 * params.Ct)); }

Vec9 derivative_labels(const Vec12& xi_dot) {
  Vec9 d;
  d << xi_dot.segment<3>(3), xi_dot.segment<3>(6), xi_dot.segment<3>(9);
  return d;
}

Vec12 rk4_step(const StateFn& f, double t, const Vec12& x, double dt) {
  const Vec12 k1 = f(t, x);
  const Vec12 k2 = f(t + dt / 2, x + dt / 2 * k1);
  const Vec12 k3 = f(t + dt / 2, x + dt / 2 * k2);
  const Vec12 k4 = f(t + dt, x + dt * k3);
  return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

namespace {

State checked_state(const Vec12& x, double t) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os << "non-finite state at t = " << t;
    throw IntegrationError(os.str(), t);
  }
  if (!(std::abs(x(7)) < kPi / 2 - kSingularityMargin) || !(std::abs(x(6)) < kPi / 2)) {
    std::ostringstream os;
    os << "attitude left the valid range at t = " << t << " (phi = " << x(6) << ", theta = " << x(7) << ")";
    throw IntegrationError(os.str(), t);
  }
  return State::from_vector(x);
}

}  // namespace

std::vector<Sample> integrate(const PlantModel& model, const State& state0, const InputFn& input, double t_end,
                              double dt) {
  if (!(dt > 0) || !(t_end > 0)) throw std::invalid_argument("integrate: dt and t_end must be positive");
  const auto steps = static_cast<long>(std::llround(t_end / dt));

  const StateFn f = [&](double t, const Vec12& x) {
    try {
      return model.derivative(x, input(t).saturated());
    } catch (const SingularityError& e) {
      throw IntegrationError(e.what(), t);
    }
  };

  std::vector<Sample> traj;
  traj.reserve(static_cast<std::size_t>(steps) + 1);
  Vec12 x = state0.to_vector();
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    Sample s;
    s.t = t;
    s.state = checked_state(x, t);
    s.input = input(t).saturated();
    s.derivs = derivative_labels(model.derivative(x, s.input));
    traj.push_back(s);
    if (k == steps) break;
    x = rk4_step(f, t, x, dt);
    x(8) = wrap_angle(x(8));
  }
  return traj;
}

RotorCommand TestSinusoid::operator()(double t) const {
  return {300.0 + 300.0 * std::sin(10.0 * t), 300.0 + 300.0 * std::sin(10.0 * t + kPi / 4),
          300.0 + 300.0 * std::sin(10.0 * t + kPi / 3), 300.0 + 300.0 * std::sin(10.0 * t + kPi / 6)};
}

RandomUniform::RandomUniform(double lo, double hi, std::uint64_t seed, double dwell, double horizon)
    : lo_(lo), hi_(hi), dwell_(dwell) {
  if (!(lo >= 0.0) || !(hi <= kMaxRotorSpeed) || !(lo <= hi)) {
    throw std::invalid_argument("random excitation range must satisfy 0 <= lo <= hi <= 1000");
  }
  if (!(dwell > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("dwell and horizon must be positive");
  const auto segments = static_cast<std::size_t>(std::ceil(horizon / dwell)) + 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  table_.reserve(segments);
  for (std::size_t i = 0; i < segments; ++i) {
    RotorCommand u;
    for (auto& v : u.u) v = dist(rng);
    table_.push_back(u);
  }
}

RotorCommand RandomUniform::operator()(double t) const {
  if (t < 0) throw std::invalid_argument("excitation time must be nonnegative");
  // small epsilon keeps segment boundaries stable against t = k*dt rounding
  const auto idx = static_cast<std::size_t>(std::floor(t / dwell_ + 1e-9));
  return table_[std::min(idx, table_.size() - 1)];
}

std::vector<Sample> generate_dataset(const PlantModel& model, const Excitation& excitation,
                                     const DatasetOptions& opts) {
  if (!(opts.duration > 0) || !(opts.sample_dt > 0) || !(opts.dt > 0)) {
    throw std::invalid_argument("generate_dataset: durations must be positive");
  }
  const auto substeps = std::llround(opts.sample_dt / opts.dt);
  if (substeps < 1 || std::abs(static_cast<double>(substeps) * opts.dt - opts.sample_dt) > 1e-12) {
    throw std::invalid_argument("sample_dt must be an integer multiple of dt");
  }
  const auto count = static_cast<std::size_t>(std::llround(opts.duration / opts.sample_dt));

  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> tilt(-0.3, 0.3);
  std::uniform_real_distribution<double> rate(-1.0, 1.0);
  std::uniform_real_distribution<double> vel(-3.0, 3.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  auto redraw = [&](Vec12& x) {
    for (int i = 3; i < 6; ++i) x(i) = vel(rng);
    for (int i = 6; i < 9; ++i) x(i) = tilt(rng);
    for (int i = 9; i < 12; ++i) x(i) = rate(rng);
  };

  Vec12 x = Vec12::Zero();
  redraw(x);

  const StateFn f = [&](double t, const Vec12& xi) { return model.derivative(xi, excitation(t).saturated()); };

  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * opts.sample_dt;
    const bool outside = std::abs(x(6)) > opts.tilt_envelope || std::abs(x(7)) > opts.tilt_envelope ||
                         x.segment<3>(3).norm() > opts.speed_envelope || !x.allFinite();
    if (outside) redraw(x);

    Sample s;
    s.t = t;
    s.state = checked_state(x, t);
    s.input = excitation(t).saturated();
    s.derivs = derivative_labels(model.derivative(x, s.input));
    if (opts.noise_sigma > 0) {
      for (int i = 0; i < 9; ++i) s.derivs(i) += opts.noise_sigma * noise(rng);
    }
    out.push_back(s);

    for (long j = 0; j < substeps; ++j) {
      const double tj = t + static_cast<double>(j) * opts.dt;
      // a spin-up inside one sample interval can cross the envelope badly
      if (std::abs(x(7)) > kPi / 2 - 0.05 || std::abs(x(6)) > kPi / 2 - 0.05) break;
      x = rk4_step(f, tj, x, opts.dt);
      x(8) = wrap_angle(x(8));
    }
  }
  return out;
}

State periodic_trim_state(const PlantModel& model, const Excitation& excitation, double period, int iterations) {
  const double dt = 1e-3;
  const auto steps = static_cast<long>(std::llround(period / dt));
  Vec12 x0 = Vec12::Zero();
  const StateFn f = [&](double t, const Vec12& xi) { return model.derivative(xi, excitation(t).saturated()); };

  for (int it = 0; it < iterations; ++it) {
    Vec12 x = x0;
    Vec3 mean_att = Vec3::Zero(), mean_rate = Vec3::Zero();
    for (long k = 0; k < steps; ++k) {
      const Vec12 next = rk4_step(f, static_cast<double>(k) * dt, x, dt);
      // trapezoidal average over the period
      mean_att += 0.5 * (x.segment<3>(6) + next.segment<3>(6));
      mean_rate += 0.5 * (x.segment<3>(9) + next.segment<3>(9));
      x = next;
    }
    mean_att /= static_cast<double>(steps);
    mean_rate /= static_cast<double>(steps);
    x0.segment<3>(6) -= mean_att;
    x0.segment<3>(9) -= mean_rate;
  }
  return State::from_vector(x0);
}

namespace {

/// Roll and pitch sampled every `sample_dt` over `horizon`, scaled by
/// 1/sqrt(count). A run reaching the attitude limit is padded with the limit.
Eigen::VectorXd attitude_residuals(const StateFn& f, const Vec12& x0, double horizon, double sample_dt, double dt) {
  const auto per = std::llround(sample_dt / dt);
  const auto count = std::llround(horizon / sample_dt);
  Eigen::VectorXd r(2 * count);
  Vec12 x = x0;
  bool lost = false;
  for (long long k = 0; k < count; ++k) {
    for (long long j = 0; j < per && !lost; ++j) {
      x = rk4_step(f, static_cast<double>(k * per + j) * dt, x, dt);
      lost = !x.allFinite() || std::abs(x(6)) > kPi / 2 - 0.05 || std::abs(x(7)) > kPi / 2 - 0.05;
    }
    r(2 * k) = lost ? kPi / 2 : x(6);
    r(2 * k + 1) = lost ? kPi / 2 : x(7);
  }
  return r / std::sqrt(static_cast<double>(count));
}

}  // namespace

State horizon_trim_state(const PlantModel& model, const Excitation& excitation, double horizon, double sample_dt) {
  const double dt = 1e-3;
  const StateFn f = [&](double t, const Vec12& xi) { return model.derivative(xi, excitation(t).saturated()); };
  Vec12 x0 = periodic_trim_state(model, excitation, 2 * kPi / 10.0).to_vector();

  // free parameters: phi, theta, wx, wy, wz
  constexpr std::array<int, 5> kFree = {6, 7, 9, 10, 11};
  const double h = 1e-7;
  // continuation over growing horizons keeps each solve inside its basin
  for (double span = std::min(2.0, horizon);; span = std::min(horizon, span + 2.0)) {
    double lambda = 1e-3;
    Eigen::VectorXd r = attitude_residuals(f, x0, span, sample_dt, dt);
    for (int it = 0; it < 30; ++it) {
      Eigen::MatrixXd jac(r.size(), 5);
      for (int p = 0; p < 5; ++p) {
        Vec12 xp = x0;
        xp(kFree[p]) += h;
        jac.col(p) = (attitude_residuals(f, xp, span, sample_dt, dt) - r) / h;
      }
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const Eigen::VectorXd jtr = jac.transpose() * r;
      bool improved = false;
      for (int tries = 0; tries < 10 && !improved; ++tries) {
        Eigen::MatrixXd a = jtj;
        a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
        const Eigen::VectorXd step = a.ldlt().solve(-jtr);
        Vec12 trial = x0;
        for (int p = 0; p < 5; ++p) trial(kFree[p]) += step(p);
        if (std::abs(trial(6)) >= kPi / 2 - 0.05 || std::abs(trial(7)) >= kPi / 2 - 0.05) {
          lambda *= 10;
          continue;
        }
        const Eigen::VectorXd rt = attitude_residuals(f, trial, span, sample_dt, dt);
        if (rt.squaredNorm() < r.squaredNorm()) {
          const double gain = r.squaredNorm() - rt.squaredNorm();
          x0 = trial;
          r = rt;
          lambda = std::max(lambda / 10, 1e-9);
          improved = true;
          if (gain < 1e-12 * (1 + r.squaredNorm())) it = 30;
        } else {
          lambda *= 10;
        }
      }
      if (!improved) break;
    }
    if (span >= horizon) break;
  }
  return State::from_vector(x0);
}

}  // namespace quadsr
