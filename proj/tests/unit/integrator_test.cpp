#include <gtest/gtest.h>

#include <cmath>

#include <twa/errors.hpp>
#include <twa/integrator.hpp>
#include <twa/models.hpp>

namespace twa {
namespace {

ModelSpec spin_model(const ClassicalExpr& h) {
  ModelSpec spec;
  spec.layout.n_spins = 1;
  spec.hamiltonian = h;
  spec.gamma.resize(0, 0);
  return spec;
}

PhaseSpaceState one_spin(const Eigen::Vector3d& s) { return {{s}, {}}; }

TEST(IntegratorConfig, StepsAndGrid) {
  IntegratorConfig c;
  c.dt = 0.1;
  c.t_final = 1.0;
  c.output_stride = 3;
  EXPECT_EQ(c.n_steps(), 10u);
  const auto t = c.output_times();
  ASSERT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t[3], 0.9);
  c.fixed_point_iters = 1;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = IntegratorConfig{};
  c.dt = -1.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = IntegratorConfig{};
  c.output_stride = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
}

TEST(Stepper, ZeroDriftLeavesStateBitwiseUnchanged) {
  const auto sys = build_langevin(spin_model(ClassicalExpr()));
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  IntegratorConfig config;
  PhaseSpaceState state = one_spin(Eigen::Vector3d(0.3, -1.0 / 3.0, std::sqrt(2.0)));
  const PhaseSpaceState before = state;
  for (int i = 0; i < 100; ++i) ASSERT_TRUE(stepper.step(state, nullptr, 0.01, config, ws));
  EXPECT_EQ(state.spins[0], before.spins[0]);
}

TEST(Stepper, PrecessionMatchesCayleyRotation) {
  // H = (w/2) s^z rotates s about z at angular frequency w; the midpoint rule
  // advances the angle by 2 atan(w dt / 2) per step.
  const double w = 1.3, dt = 0.05;
  const int n = 200;
  const auto sys = build_langevin(spin_model(0.5 * w * sz(0)));
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  IntegratorConfig config;
  config.fixed_point_iters = 2;
  PhaseSpaceState state = one_spin(Eigen::Vector3d(1.0, 0.0, 0.5));
  for (int i = 0; i < n; ++i) ASSERT_TRUE(stepper.step(state, nullptr, dt, config, ws));
  const double angle = n * 2.0 * std::atan(0.5 * w * dt);
  EXPECT_NEAR(state.spins[0].x(), std::cos(angle), 1e-13);
  EXPECT_NEAR(state.spins[0].y(), std::sin(angle), 1e-13);
  EXPECT_EQ(state.spins[0].z(), 0.5);
  // Phase lag per step is (w dt)^3 / 12.
  const double exact = w * n * dt;
  EXPECT_NEAR(state.spins[0].x(), std::cos(exact), 5e-3);
}

TEST(Stepper, RabiOscillationConvergesAtSecondOrder) {
  DrivenSpinParams p;
  p.omega = 1.0;
  const auto sys = build_langevin(build_driven_spin(p));
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  const double t_final = 2.0;
  std::vector<double> errors;
  for (double dt : {0.02, 0.01, 0.005}) {
    IntegratorConfig config;
    config.fixed_point_iters = 20;
    config.fixed_point_tol = 1e-15;
    PhaseSpaceState state = one_spin(Eigen::Vector3d(0, 0, -1));
    const int n = static_cast<int>(std::lround(t_final / dt));
    for (int i = 0; i < n; ++i) ASSERT_TRUE(stepper.step(state, nullptr, dt, config, ws));
    errors.push_back(std::abs(state.spins[0].z() + std::cos(2.0 * p.omega * t_final)));
  }
  EXPECT_NEAR(errors[0] / errors[1], 4.0, 0.2);
  EXPECT_NEAR(errors[1] / errors[2], 4.0, 0.2);
}

TEST(Stepper, SpinLengthConservedUnderStrongNoise) {
  DrivenSpinParams p;
  p.omega = 1.0;
  p.gamma_down = 10.0;
  p.gamma_up = 3.0;
  const auto sys = build_langevin(build_driven_spin(p));
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  IntegratorConfig config;
  config.dt = 0.01;
  config.t_final = 20.0;
  for (std::uint64_t traj = 0; traj < 20; ++traj) {
    auto rng = make_stream(9, StreamKind::Noise, traj);
    double worst = 0.0;
    integrate_trajectory(
        one_spin(Eigen::Vector3d(1, -1, -1)), stepper, config, rng,
        [&](std::size_t, double, const PhaseSpaceState& s) {
          worst = std::max(worst, std::abs(s.spins[0].squaredNorm() - 3.0));
        },
        ws);
    EXPECT_LE(worst, 1e-12);
  }
}

TEST(NoiseMixer, DiagonalCovariance) {
  DrivenSpinParams p;
  p.gamma_down = 0.7;
  p.gamma_up = 0.2;
  const auto sys = build_langevin(build_driven_spin(p));
  const NoiseMixer mixer(sys);
  ASSERT_EQ(mixer.components(), 4u);
  const double dt = 0.01;
  const int n = 100000;
  auto rng = make_stream(1, StreamKind::Noise, 0);
  std::normal_distribution<double> gauss;
  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  std::vector<double> xi(4);
  for (int i = 0; i < n; ++i) {
    mixer.draw(rng, gauss, dt, xi.data());
    const Eigen::Map<Eigen::Vector4d> v(xi.data());
    sum += v * v.transpose();
  }
  const Eigen::Matrix4d cov = sum / n * dt;
  const double rates[4] = {0.7, 0.7, 0.2, 0.2};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double expected = a == b ? rates[a] : 0.0;
      const double se = std::sqrt((rates[a] * rates[b] + expected * expected) / n);
      EXPECT_NEAR(cov(a, b), expected, 5.0 * se) << a << "," << b;
    }
  }
}

TEST(NoiseMixer, ComplexCorrelatedCovariance) {
  ModelSpec spec;
  spec.layout.n_spins = 2;
  spec.jumps = {s_minus(0), s_minus(1)};
  spec.gamma.resize(2, 2);
  spec.gamma << 1.0, Complex(0.3, 0.5), Complex(0.3, -0.5), 0.8;
  const auto sys = build_langevin(spec);
  const NoiseMixer mixer(sys);
  const double dt = 0.1;
  const int n = 200000;
  auto rng = make_stream(2, StreamKind::Noise, 0);
  std::normal_distribution<double> gauss;
  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  std::vector<double> xi(4);
  for (int i = 0; i < n; ++i) {
    mixer.draw(rng, gauss, dt, xi.data());
    const Eigen::Map<Eigen::Vector4d> v(xi.data());
    sum += v * v.transpose();
  }
  const Eigen::Matrix4d cov = sum / n * dt;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const NoiseComponent ca{a / 2, static_cast<NoiseAxis>(a % 2)};
      const NoiseComponent cb{b / 2, static_cast<NoiseAxis>(b % 2)};
      const double expected = noise_covariance(spec.gamma, ca, cb);
      const double va = noise_covariance(spec.gamma, ca, ca), vb = noise_covariance(spec.gamma, cb, cb);
      const double se = std::sqrt((va * vb + expected * expected) / n);
      EXPECT_NEAR(cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), expected, 5.0 * se)
          << a << "," << b;
    }
  }
}

TEST(Integrator, DampedCavityRelaxesToVacuumNoise) {
  // Single mode with loss: <a> decays as exp(-(i w + k/2) t) and
  // <|a|^2> - 1/2 = |alpha|^2 exp(-k t) for a coherent start.
  ModelSpec spec;
  spec.layout.n_bosons = 1;
  const double w = 2.0, k = 1.0;
  spec.hamiltonian = w * amp_conj(0) * amp(0);
  spec.jumps = {amp(0)};
  spec.gamma = Eigen::MatrixXcd::Constant(1, 1, k);
  const auto sys = build_langevin(spec);
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  IntegratorConfig config;
  config.dt = 0.005;
  config.t_final = 2.0;
  const Complex alpha(1.5, 0.5);
  const int n = 4000;
  Complex mean_a = 0.0;
  double mean_n = 0.0, m2 = 0.0;
  for (int traj = 0; traj < n; ++traj) {
    auto init = make_stream(3, StreamKind::Initial, static_cast<std::uint64_t>(traj));
    auto noise = make_stream(3, StreamKind::Noise, static_cast<std::uint64_t>(traj));
    PhaseSpaceState s{{}, {sample_boson_coherent(alpha, init)}};
    const auto path = integrate_trajectory(s, sys, config, noise);
    const Complex a = path.back().bosons[0];
    mean_a += a;
    mean_n += std::norm(a);
    m2 += std::norm(a) * std::norm(a);
  }
  mean_a /= n;
  mean_n /= n;
  const double se = std::sqrt((m2 / n - mean_n * mean_n) / n);
  const double t = config.t_final;
  const Complex expected_a = alpha * std::exp(Complex(-0.5 * k * t, -w * t));
  EXPECT_NEAR(std::abs(mean_a - expected_a), 0.0, 5.0 * 0.5 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(mean_n - 0.5, std::norm(alpha) * std::exp(-k * t), 5.0 * se);
}

TEST(Integrator, RunawayTrajectoryReportsFailureTime) {
  ModelSpec spec;
  spec.layout.n_bosons = 1;
  spec.hamiltonian = 0.5 * amp_conj(0) * amp_conj(0) * amp(0) * amp(0);
  spec.gamma.resize(0, 0);
  const auto sys = build_langevin(spec);
  IntegratorConfig config;
  config.dt = 1.0;
  config.t_final = 50.0;
  auto rng = make_stream(1, StreamKind::Noise, 0);
  PhaseSpaceState s{{}, {Complex(1e3, 0.0)}};
  try {
    integrate_trajectory(s, sys, config, rng);
    FAIL() << "expected NonFiniteState";
  } catch (const NonFiniteState& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), config.t_final);
  }
}

TEST(Integrator, CallbackSeesEveryRecordedTime) {
  const auto sys = build_langevin(spin_model(sz(0)));
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  IntegratorConfig config;
  config.dt = 0.1;
  config.t_final = 1.0;
  config.output_stride = 2;
  auto rng = make_stream(1, StreamKind::Noise, 0);
  std::vector<double> seen;
  integrate_trajectory(one_spin(Eigen::Vector3d(1, 0, 0)), stepper, config, rng,
                       [&](std::size_t record, double t, const PhaseSpaceState&) {
                         EXPECT_EQ(record, seen.size());
                         seen.push_back(t);
                       },
                       ws);
  const auto expected = config.output_times();
  ASSERT_EQ(seen.size(), expected.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_DOUBLE_EQ(seen[i], expected[i]);
}

}  // namespace
}  // namespace twa
