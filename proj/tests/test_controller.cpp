#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "quadsr/controller.hpp"
#include "quadsr/learned_model.hpp"

using namespace quadsr;

namespace {

// Second implementation of the expanded backstepping targets, written from
// the unexpanded definitions e, sd_{i+4}, delta.
Vec4 backstepping_oracle(const InnerState& s, const InnerReference& r, const GainSet& g) {
  const Vec8 sv = s.to_vector();
  Vec4 out;
  for (int i = 0; i < 4; ++i) {
    const double ci = g.c(i + 1), ci4 = g.c(i + 5);
    const double e = r.sd(i) - sv(i);
    const double e_dot = r.sd_dot(i) - sv(i + 4);
    const double virt = r.sd_dot(i) + ci * e;       // s_{(i+4)d}
    const double virt_dot = r.sd_ddot(i) + ci * e_dot;
    const double delta = virt - sv(i + 4);
    out(i) = e + virt_dot + ci4 * delta;
  }
  return out;
}

InnerState random_inner(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-1.2, 1.2), v(-3, 3);
  return {v(rng), a(rng), a(rng), v(rng), v(rng), v(rng), v(rng), v(rng)};
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(ControllerConfig, TunedPreset) {
  const ControllerConfig c = ControllerConfig::tuned();
  EXPECT_DOUBLE_EQ(c.tilt_limit, 0.4);
  EXPECT_DOUBLE_EQ(c.tilt_rate_limit, 2.0);
  EXPECT_NO_THROW(c.validate());
  ControllerConfig bad;
  bad.dt = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = ControllerConfig{};
  bad.tilt_rate_limit = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(OuterLoop, HoverRollDemand) {
  OuterLoop outer(GainSet::defaults(), ControllerConfig{});
  const auto out = outer(State{}, Reference::hold(State{}), RotorCommand::uniform(584.83), 0.0);
  const double den = (7.87e-6 + 3 * 7.78e-6) * 584.83 * 584.83;
  EXPECT_NEAR(den, 10.675, 0.001);
  EXPECT_NEAR(out.phi_d, std::asin(0.0441 / den), 1e-12);
  EXPECT_NEAR(out.phi_d, 0.00413, 5e-6);
  EXPECT_NEAR(out.theta_d, 0.0, 1e-15);
  EXPECT_EQ(out.flags, kFlagNone);
}

TEST(OuterLoop, YawEntersSubtractively) {
  OuterLoop outer(GainSet::defaults(), ControllerConfig{});
  State s;
  s.set_psi(0.5);
  Reference ref = Reference::hold(State{});
  const auto out = outer(s, ref, RotorCommand::uniform(584.83), 0.0);
  EXPECT_NEAR(out.phi_d, 0.00413 - 0.5, 5e-6);
}

TEST(OuterLoop, ZeroThrustHoldsPrevious) {
  OuterLoop outer(GainSet::defaults(), ControllerConfig{});
  outer.reset(0.1, -0.2);
  const auto out = outer(State{}, Reference::hold(State{}), RotorCommand{}, 0.0);
  EXPECT_TRUE(out.flags & kFlagRollHeld);
  EXPECT_TRUE(out.flags & kFlagPitchHeld);
  EXPECT_DOUBLE_EQ(out.phi_d, 0.1);
  EXPECT_DOUBLE_EQ(out.theta_d, -0.2);
}

TEST(OuterLoop, SaturatesAndClamps) {
  OuterLoop outer(GainSet::defaults(), ControllerConfig{});
  Reference ref = Reference::hold(State{});
  ref.y = Trajectory::constant(100.0);
  ref.x = Trajectory::constant(100.0);
  const auto out = outer(State{}, ref, RotorCommand::uniform(100), 0.0);
  EXPECT_TRUE(out.flags & kFlagArcsinSaturated);
  EXPECT_TRUE(out.flags & kFlagPitchClamped);
  EXPECT_LE(std::abs(out.phi_d), kPi / 2 - 0.05 + 1e-15);
  EXPECT_LE(std::abs(out.theta_d), kPi / 2 - 0.05 + 1e-15);
}

TEST(OuterLoop, SlewLimit) {
  ControllerConfig c = ControllerConfig::tuned();
  OuterLoop outer(GainSet::defaults(), c);
  Reference ref = Reference::hold(State{});
  ref.x = Trajectory::constant(5.0);
  const auto out = outer(State{}, ref, RotorCommand::uniform(584.83), 0.0);
  EXPECT_TRUE(out.flags & kFlagRateLimited);
  EXPECT_NEAR(std::abs(out.theta_d), c.tilt_rate_limit * c.dt, 1e-15);
  EXPECT_EQ(out.flags & kSaturationFlags & ~kFlagPitchClamped, 0u);
}

TEST(OuterLoop, InvertsTranslationalChannels) {
  const LearnedModel m;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(-2, 2), yaw(-1, 1), sp(450, 750);
  int checked = 0;
  for (int n = 0; n < 2000; ++n) {
    OuterLoop outer(GainSet::defaults(), ControllerConfig{});
    State s;
    s.x = pos(rng);
    s.y = pos(rng);
    s.vx = pos(rng);
    s.vy = pos(rng);
    s.set_psi(yaw(rng));
    const RotorCommand u(sp(rng), sp(rng), sp(rng), sp(rng));
    const Reference ref = Reference::case1();
    const double t = 3.0 * n / 2000.0;
    const auto out = outer(s, ref, u, t);
    if (out.flags != kFlagNone) continue;
    ++checked;
    State at = s;
    at.set_attitude(out.phi_d, out.theta_d, s.psi());
    EXPECT_NEAR(m.zeta(4, at, u), out.ax, 1e-9 * std::max(1.0, std::abs(out.ax)));
    EXPECT_NEAR(m.zeta(5, at, u), out.ay, 1e-9 * std::max(1.0, std::abs(out.ay)));
  }
  EXPECT_GT(checked, 200);
}

TEST(OuterLoop, CaseOneInitialError) {
  OuterLoop outer(GainSet::defaults(), ControllerConfig{});
  const auto out = outer(State{}, Reference::case1(), RotorCommand::uniform(584.83), 0.0);
  EXPECT_NEAR(out.ex, 2.598, 1e-3);
  EXPECT_NEAR(out.ey, -2.598, 1e-3);
}

TEST(Backstepping, PerfectTrackingIsZero) {
  InnerState s{1, 0.1, -0.2, 0.3, 0.5, -0.4, 0.2, 0.1};
  InnerReference r;
  r.sd << s.z, s.phi, s.theta, s.psi;
  r.sd_dot << s.zdot, s.phidot, s.thetadot, s.psidot;
  EXPECT_TRUE(backstepping_virtual(s, r, GainSet::defaults()).isZero(1e-15));
}

TEST(Backstepping, HandExample) {
  std::array<double, 8> c = GainSet::defaults().c_all();
  c[0] = 2;
  c[4] = 3;
  const GainSet g(1, 1, 1, 1, c);
  InnerReference r;
  r.sd(0) = 1;
  EXPECT_DOUBLE_EQ(backstepping_virtual(InnerState{}, r, g)(0), 7.0);
}

TEST(Backstepping, MatchesUnexpandedForm) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int n = 0; n < 1000; ++n) {
    const InnerState s = random_inner(rng);
    InnerReference r;
    for (int i = 0; i < 4; ++i) {
      r.sd(i) = d(rng);
      r.sd_dot(i) = d(rng);
      r.sd_ddot(i) = d(rng);
    }
    const Vec4 a = backstepping_virtual(s, r, GainSet::defaults());
    const Vec4 b = backstepping_oracle(s, r, GainSet::defaults());
    for (int i = 0; i < 4; ++i) EXPECT_LE(rel_err(a(i), b(i)), 1e-12);
  }
}

TEST(Lyapunov, ClosedLoopDerivativeIsNegative) {
  std::mt19937_64 rng(43);
  for (int n = 0; n < 200; ++n) {
    const InnerState s = random_inner(rng);
    InnerReference r;
    const GainSet g = GainSet::defaults();
    const LyapunovTerms l = lyapunov_terms(s, r, g);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_LE(l.W_dot[i], 0.0);
      EXPECT_NEAR(l.W[i], l.V[i] + 0.5 * l.delta[i] * l.delta[i], 1e-12 * std::max(1.0, l.W[i]));
      EXPECT_NEAR(l.V[i], 0.5 * l.e[i] * l.e[i], 1e-15 * std::max(1.0, l.V[i]));
    }
  }
}

TEST(SolveVirtualControls, VerticalAtOrigin) {
  const VirtualControl f = solve_virtual_controls(Vec4::Zero(), InnerState{});
  EXPECT_NEAR(f.f1, 9.44 / 6.9e-6, 1e-6);
  EXPECT_NEAR(f.f1, 1368116, 1);
}

TEST(SolveVirtualControls, RollAtLevel) {
  InnerState s;
  s.thetadot = 0.0;  // Rdot vanishes when thetadot = 0 at level
  s.phidot = 0.0;
  s.psidot = 0.8;
  const Vec4 target(0, 1.5, 0, 0);
  const VirtualControl f = solve_virtual_controls(target, s);
  const double wy = 0.0, wz = 0.8;
  EXPECT_NEAR(f.f2, (1.5 - 0.697 * wy * wz) / 8.33e-5, 1e-6);
}

TEST(SolveVirtualControls, RoundTrip) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> d(-20, 20);
  for (int n = 0; n < 2000; ++n) {
    const InnerState s = random_inner(rng);
    const Vec4 target(d(rng), d(rng), d(rng), d(rng));
    const VirtualControl f = solve_virtual_controls(target, s);
    const Vec8 g = inner_dynamics(s, f);
    for (int i = 0; i < 4; ++i) EXPECT_LE(rel_err(g(4 + i), target(i)), 1e-9);
  }
}

TEST(SolveVirtualControls, RejectsSingularAttitude) {
  InnerState s;
  s.phi = kPi / 2 - 1e-9;
  EXPECT_THROW(solve_virtual_controls(Vec4::Zero(), s), SingularityError);
  s.phi = 0;
  s.theta = kPi / 2;
  EXPECT_THROW(solve_virtual_controls(Vec4::Zero(), s), SingularityError);
}

TEST(Allocate, SymmetricHover) {
  const Allocation a = allocate({4 * 600.0 * 600.0, 0, 0, 0});
  for (double u : a.u.u) EXPECT_NEAR(u, 600.0, 1e-12);
  EXPECT_EQ(a.flags, kFlagNone);
}

TEST(Allocate, GridRoundTrip) {
  const double levels[] = {0, 250, 500, 750, 1000};
  for (double a : levels)
    for (double b : levels)
      for (double c : levels)
        for (double d : levels) {
          const RotorCommand u(a, b, c, d);
          const Allocation back = allocate(mix(u));
          for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.u[i], u[i], 1e-9);
        }
}

TEST(Allocate, InfeasibleDemandFlagged) {
  const Allocation a = allocate({100, 500, 0, 0});
  EXPECT_TRUE(a.flags & kFlagNegativeSquare);
  EXPECT_EQ(a.u[0], 0.0);
  const Allocation b = allocate({4 * 1200.0 * 1200.0, 0, 0, 0});
  EXPECT_TRUE(b.flags & kFlagSpeedSaturated);
  EXPECT_EQ(b.u[2], 1000.0);
}

TEST(CommandFilter, ConvergesToStepWithConsistentDerivatives) {
  CommandFilter f(20.0, 1.0);
  f.reset(0.0);
  RefPoint prev = f.update(1.0, 0.001);
  EXPECT_EQ(prev.value, 0.0);
  for (int k = 1; k < 1000; ++k) {
    const RefPoint p = f.update(1.0, 0.001);
    // trapezoid error bound dt^2/12 * max jerk, jerk <= 2 wn^3
    EXPECT_NEAR((p.value - prev.value) / 0.001, 0.5 * (p.rate + prev.rate), 1e-6 / 12 * 2 * 8000 * 1.1);
    prev = p;
  }
  EXPECT_NEAR(prev.value, 1.0, 1e-5);
}

TEST(Hierarchical, HoverHoldsOnLearnedPlant) {
  HierarchicalController c(GainSet::defaults(), ControllerConfig::tuned());
  EXPECT_NEAR(HierarchicalController::hover_speed(), 584.83, 0.01);
  const LearnedModel m;
  const Dynamics dyn = [&m](const Vec12& x, const RotorCommand& u) { return m.derivative(x, u); };
  const TrackResult r = simulate_tracking(dyn, c, Reference::hold(State{}), State{}, 5.0, 0.001);
  ASSERT_FALSE(r.failed) << r.error;
  for (const TrackRecord& rec : r.records) {
    EXPECT_EQ(rec.diag.flags & kSaturationFlags, 0u);
    EXPECT_LT(std::abs(rec.state.x) + std::abs(rec.state.y) + std::abs(rec.state.z), 1e-3);
    // collective stays at hover; the roll needed against the lateral bias
    // shows up only as a small differential
    const RotorCommand& u = rec.diag.u;
    EXPECT_NEAR(std::sqrt(mix(u).f1 / 4), 584.83, 0.5);
    for (double ui : u.u) EXPECT_NEAR(ui, 584.83, 10.0);
  }
  const RotorCommand& a = r.records[r.records.size() - 200].diag.u;
  const RotorCommand& b = r.records.back().diag.u;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], b[i], 0.05);
}

TEST(Hierarchical, RecordsEveryControlPeriod) {
  HierarchicalController c(GainSet::defaults(), ControllerConfig::tuned());
  const LearnedModel m;
  const Dynamics dyn = [&m](const Vec12& x, const RotorCommand& u) { return m.derivative(x, u); };
  const TrackResult r = simulate_tracking(dyn, c, Reference::case2(), State{}, 1.0, 0.001);
  ASSERT_FALSE(r.failed);
  ASSERT_EQ(r.records.size(), 201u);
  EXPECT_DOUBLE_EQ(r.records.back().t, 1.0);
  EXPECT_NEAR(r.records.front().diag.ex, 2.0, 1e-12);
}

TEST(Hierarchical, DivergingPlantReportsFailure) {
  HierarchicalController c(GainSet::defaults(), ControllerConfig{});
  const Dynamics dyn = [](const Vec12&, const RotorCommand&) {
    Vec12 d = Vec12::Zero();
    d(7) = 10.0;  // pitch runs away regardless of input
    return d;
  };
  const TrackResult r = simulate_tracking(dyn, c, Reference::hold(State{}), State{}, 2.0, 0.001);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.error.empty());
}
