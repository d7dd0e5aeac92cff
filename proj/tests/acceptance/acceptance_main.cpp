// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.
//
//   twa_acceptance            run every criterion
//   twa_acceptance 4 7        run criteria 4 and 7
//
// Wall-time budgets are enforced on machines with at least four hardware
// threads; elsewhere the time is reported next to the budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <random_expr.hpp>
#include <twa/ensemble.hpp>
#include <twa/integrator.hpp>
#include <twa/langevin.hpp>
#include <twa/models.hpp>
#include <twa/oracle.hpp>
#include <twa/series.hpp>

namespace twa::acceptance {
namespace {

constexpr unsigned kBudgetThreads = 4;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Largest trace drift and Hermiticity residue seen by any oracle run.
struct OracleHealth {
  double trace = 0.0;
  double hermiticity = 0.0;

  void note(const OracleResult& r) {
    trace = std::max(trace, r.max_trace_drift);
    hermiticity = std::max(hermiticity, r.max_hermiticity_error);
  }
  void check(Outcome& out) const {
    out.detail << " | oracle trace " << fmt(trace, 2) << " herm " << fmt(hermiticity, 2);
    out.require(trace <= 1e-9, "oracle trace drift");
    out.require(hermiticity <= 1e-10, "oracle Hermiticity");
  }
};

IntegratorConfig grid(double dt, double t_final, std::size_t stride) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_final = t_final;
  c.output_stride = stride;
  return c;
}

EnsembleConfig samples(std::size_t n, std::uint64_t seed) {
  EnsembleConfig e;
  e.n_total = n;
  e.seed = seed;
  return e;
}

OracleResult exact(const ModelSpec& spec, const SamplerSpec& sampler, std::size_t cutoff,
                   const std::vector<double>& times, const std::vector<ObservableSpec>& obs,
                   OracleHealth& health, double dt = 0.0) {
  OracleConfig config;
  config.dt = dt;
  const auto layout = HilbertLayout::for_model(spec.layout, cutoff);
  OracleResult r = run_oracle(spec, sampler, layout, times, obs, config);
  health.note(r);
  return r;
}

Eigen::VectorXd row(const ObservableSeries& s, std::size_t obs) {
  return s.mean.row(static_cast<Eigen::Index>(obs)).transpose();
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Mean over the trailing `fraction` of the grid.
double tail_mean(const Eigen::VectorXd& v, double fraction) {
  const auto n = v.size();
  const auto start = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * (1.0 - fraction)));
  return v.segment(start, n - start).mean();
}

SamplerSpec all_spins(const ModelSpec& spec, const Eigen::Vector3d& dir) {
  return SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, dir,
                              std::vector<Complex>(spec.layout.n_bosons, Complex(0.0)));
}

const Eigen::Vector3d kUp = Eigen::Vector3d::UnitZ();
const Eigen::Vector3d kDown = -Eigen::Vector3d::UnitZ();

// 1. Driven spin against the exact solution; strong loss must deviate.
Outcome driven_spin() {
  Outcome out;
  OracleHealth health;
  const auto cfg = grid(0.02, 10.0, 2);
  const auto times = cfg.output_times();
  const std::vector<ObservableSpec> obs = {ObservableSpec::spin(0, Axis::Z)};
  for (double gamma : {0.1, 0.5, 1.0, 4.0}) {
    DrivenSpinParams p;
    p.omega = 1.0;
    p.gamma_down = gamma;
    const auto spec = build_driven_spin(p);
    const auto sampler = all_spins(spec, kDown);
    const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(100000, 11));
    const auto ref = exact(spec, sampler, 0, times, obs, health, 1e-3);
    const Eigen::VectorXd a = row(twa, 0), b = row(ref.series, 0);
    if (gamma < 2.0) {
      const double dev = max_abs_diff(a, b);
      out.detail << " g/W=" << gamma << " max|dsz|=" << fmt(dev, 3);
      out.require(dev <= 0.05, "g/W=" + fmt(gamma) + " max deviation > 0.05");
    } else {
      const double dev = std::abs(tail_mean(a, 0.2) - tail_mean(b, 0.2));
      out.detail << " g/W=" << gamma << " steady |dsz|=" << fmt(dev, 3);
      out.require(dev >= 0.1, "g/W=4 steady-state deviation < 0.1");
    }
  }
  health.check(out);
  return out;
}

NoiseComponent nx(std::size_t c) { return {c, NoiseAxis::X}; }
NoiseComponent ny(std::size_t c) { return {c, NoiseAxis::Y}; }

// Drift of one variable and its couplings to the two components of channel 0.
bool rhs_equals(const LangevinSystem& sys, Variable v, const ClassicalExpr& drift,
                const ClassicalExpr& cx, const ClassicalExpr& cy) {
  const std::size_t i = sys.index_of(v);
  return sys.drift[i] == drift && sys.coupling(i, nx(0)) == cx && sys.coupling(i, ny(0)) == cy;
}

// 2. Classical equations of the three single-spin channels.
Outcome channel_equations() {
  Outcome out;
  const Variable x = Variable::spin(0, Axis::X), y = Variable::spin(0, Axis::Y), z = Variable::spin(0, Axis::Z);
  const auto single = [](const ClassicalExpr& jump, double rate) {
    ModelSpec spec;
    spec.layout.n_spins = 1;
    spec.jumps = {jump};
    spec.gamma = Eigen::MatrixXcd::Constant(1, 1, rate);
    return build_langevin(spec);
  };
  const auto covariance_is = [](const LangevinSystem& sys, double xx, double yy) {
    return noise_covariance(sys.gamma, nx(0), nx(0)) == xx && noise_covariance(sys.gamma, ny(0), ny(0)) == yy &&
           noise_covariance(sys.gamma, nx(0), ny(0)) == 0.0;
  };

  const double g = 0.75;
  const auto loss = single(s_minus(0), g);
  const bool loss_ok = rhs_equals(loss, x, 0.5 * g * sx(0) * sz(0), sz(0), {}) &&
                       rhs_equals(loss, y, 0.5 * g * sy(0) * sz(0), {}, sz(0)) &&
                       rhs_equals(loss, z, -0.5 * g * (sx(0) * sx(0) + sy(0) * sy(0)), -sx(0), -sy(0)) &&
                       covariance_is(loss, g, g);

  const double p = 0.375;
  const auto pump = single(s_plus(0), p);
  const bool pump_ok = rhs_equals(pump, x, -0.5 * p * sx(0) * sz(0), -sz(0), {}) &&
                       rhs_equals(pump, y, -0.5 * p * sy(0) * sz(0), {}, sz(0)) &&
                       rhs_equals(pump, z, 0.5 * p * (sx(0) * sx(0) + sy(0) * sy(0)), sx(0), -sy(0)) &&
                       covariance_is(pump, p, p);

  // Dephasing keeps a single real noise of variance kappa.
  const double k = 0.25;
  const auto deph = single(sz(0), k);
  const bool deph_ok = rhs_equals(deph, x, {}, {}, 2.0 * sy(0)) && rhs_equals(deph, y, {}, {}, -2.0 * sx(0)) &&
                       rhs_equals(deph, z, {}, {}, {}) && deph.couplings.size() == 2 &&
                       noise_covariance(deph.gamma, ny(0), ny(0)) == k;

  out.detail << " loss " << (loss_ok ? "ok" : "mismatch") << ", pump " << (pump_ok ? "ok" : "mismatch")
             << ", dephasing " << (deph_ok ? "ok" : "mismatch");
  out.require(loss_ok && pump_ok && deph_ok, "equation mismatch");
  return out;
}

// 3. |s|^2 along individual trajectories at each model's default step.
Outcome spin_length() {
  Outcome out;
  DrivenSpinParams d;
  d.gamma_down = 0.5;
  d.gamma_up = 0.2;
  TavisCummingsParams tc;
  tc.n = 4;
  tc.g = 0.9;
  tc.kappa = 1.0;
  tc.gamma_down = 0.125;
  tc.gamma_up = 0.375;
  CentralSpinParams cs;
  cs.n = 6;
  cs.g = 3.0;
  cs.kappa = 1.0;
  cs.gamma_down = 0.5;
  cs.gamma_up = 1.5;
  RydbergChainParams ry;
  ry.n = 8;
  ry.kappa = 0.1;
  ry.gamma_down = 0.1;
  AtomArrayParams aa;
  aa.n = 8;
  aa.spacing = 0.1;
  aa.omega = 1.0;
  DrivenSpinParams big;
  big.spin_size = 10.0;
  big.gamma_down = 1.0;
  big.omega = 0.1;
  big.rescale_decay = true;
  const std::vector<ModelSpec> models = {build_driven_spin(d),    build_tavis_cummings(tc), build_central_spin(cs),
                                         build_rydberg_chain(ry), build_atom_array(aa),     build_driven_spin(big)};

  double worst = 0.0;
  for (const auto& spec : models) {
    const auto sys = build_langevin(spec);
    const Stepper stepper(sys);
    auto ws = stepper.workspace();
    IntegratorConfig cfg = grid(default_time_step(spec), 2.0, 1);
    double model_worst = 0.0;
    for (SpinScheme scheme : {SpinScheme::Discrete, SpinScheme::Classical}) {
      SamplerSpec sampler;
      for (std::size_t k = 0; k < spec.layout.n_spins; ++k) {
        sampler.spins.push_back({scheme, k % 2 == 0 ? kUp : Eigen::Vector3d(0.6, 0.0, -0.8),
                                 spec.layout.spin_size(k)});
      }
      sampler.bosons.assign(spec.layout.n_bosons, Complex(0.5, 0.0));
      for (std::size_t traj = 0; traj < 16; ++traj) {
        auto init_rng = make_stream(3, StreamKind::Initial, traj);
        auto noise_rng = make_stream(3, StreamKind::Noise, traj);
        const PhaseSpaceState s0 = sample_state(sampler, init_rng);
        integrate_trajectory(
            s0, stepper, cfg, noise_rng,
            [&](std::size_t, double, const PhaseSpaceState& s) {
              for (std::size_t k = 0; k < s.spins.size(); ++k) {
                const double two_s = 2.0 * spec.layout.spin_size(k);
                // Classical samples sit on |s| = 2S; discrete ones keep their initial length.
                const double target = scheme == SpinScheme::Classical ? two_s * two_s : s0.spins[k].squaredNorm();
                model_worst = std::max(model_worst, std::abs(s.spins[k].squaredNorm() - target) / (two_s * two_s));
              }
            },
            ws);
      }
    }
    out.detail << " " << spec.name << "=" << fmt(model_worst, 2);
    worst = std::max(worst, model_worst);
  }
  out.require(worst <= 1e-8, "relative length drift > 1e-8");
  return out;
}

// 4. Tavis-Cummings steady photon number and the unpumped transient peak.
Outcome tavis_cummings() {
  Outcome out;
  OracleHealth health;
  const std::vector<ObservableSpec> obs = {ObservableSpec::photon_number()};
  const double n_atoms = 4.0;
  {
    TavisCummingsParams p;
    p.n = 4;
    p.g = 0.9;
    p.kappa = 1.0;
    p.gamma_down = 0.125;
    p.gamma_up = 0.375;
    const auto spec = build_tavis_cummings(p);
    const auto sampler = all_spins(spec, kUp);
    const auto cfg = grid(0.02, 30.0, 25);
    const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(100000, 41));
    const auto ref = exact(spec, sampler, 12, cfg.output_times(), obs, health);
    const double a = tail_mean(row(twa, 0), 1.0 / 3.0) / n_atoms, b = tail_mean(row(ref.series, 0), 1.0 / 3.0) / n_atoms;
    const double rel = std::abs(a - b) / b;
    out.detail << " steady n/N twa " << fmt(a) << " exact " << fmt(b) << " rel " << fmt(rel, 2);
    out.require(rel <= 0.05, "steady-state relative error > 5%");
  }
  {
    TavisCummingsParams p;
    p.n = 4;
    p.omega = 1.0;
    p.epsilon = 0.5;
    p.g = 1.7;
    p.kappa = 1.0;
    p.gamma_down = 0.25;
    const auto spec = build_tavis_cummings(p);
    const auto sampler = all_spins(spec, kUp);
    const auto cfg = grid(0.01, 10.0, 5);
    const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(100000, 42));
    const auto ref = exact(spec, sampler, 12, cfg.output_times(), obs, health);
    const double a = row(twa, 0).maxCoeff() / n_atoms, b = row(ref.series, 0).maxCoeff() / n_atoms;
    const double rel = std::abs(a - b) / b;
    out.detail << " | unpumped peak twa " << fmt(a) << " exact " << fmt(b) << " rel " << fmt(rel, 2);
    out.require(rel <= 0.10, "transient peak relative error > 10%");
  }
  health.check(out);
  return out;
}

// 5. Central spin population, six satellites.
Outcome central_spin() {
  Outcome out;
  OracleHealth health;
  CentralSpinParams p;
  p.n = 6;
  p.g = 3.0;
  p.kappa = 1.0;
  p.gamma_down = 0.5;
  p.gamma_up = 1.5;
  const auto spec = build_central_spin(p);
  const auto sampler = central_spin_initial(p, SpinScheme::Discrete);
  const std::vector<ObservableSpec> obs = {ObservableSpec::central_population()};
  const auto cfg = grid(0.01, 15.0, 10);
  const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(100000, 51));
  const auto ref = exact(spec, sampler, 0, cfg.output_times(), obs, health);
  const Eigen::VectorXd a = row(twa, 0), b = row(ref.series, 0);
  const double steady = std::abs(tail_mean(a, 0.2) - tail_mean(b, 0.2));
  const double transient = max_abs_diff(a, b);
  out.detail << " steady |dn| " << fmt(steady, 3) << " max |dn| " << fmt(transient, 3);
  out.require(steady <= 0.05, "steady-state deviation > 0.05");
  out.require(transient <= 0.07, "transient deviation > 0.07");
  health.check(out);
  return out;
}

// 6. Rydberg chain from the ground state at three drive strengths.
Outcome rydberg_chain() {
  Outcome out;
  OracleHealth health;
  const std::vector<ObservableSpec> obs = {ObservableSpec::mean_spin(Axis::Z)};
  const auto cfg = grid(0.01, 10.0, 5);
  for (double omega : {0.5, 1.0, 2.0}) {
    RydbergChainParams p;
    p.n = 8;
    p.j = 1.0;
    p.omega = omega;
    p.kappa = 0.1;
    p.gamma_down = 0.1;
    const auto spec = build_rydberg_chain(p);
    const auto sampler = all_spins(spec, kDown);
    const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(20000, 61));
    const auto ref = exact(spec, sampler, 0, cfg.output_times(), obs, health);
    const double dev = max_abs_diff(row(twa, 0), row(ref.series, 0));
    out.detail << " W/J=" << omega << " max|dsz| " << fmt(dev, 3);
    out.require(dev <= 0.05, "W/J=" + fmt(omega) + " deviation > 0.05");
  }
  health.check(out);
  return out;
}

// 7. Atom arrays: driven excitation, superradiant burst, large-N demo.
Outcome atom_arrays() {
  Outcome out;
  OracleHealth health;
  {
    AtomArrayParams p;
    p.n = 8;
    p.spacing = 0.2;
    p.omega = 2.0;
    const auto spec = build_atom_array(p);
    const auto sampler = all_spins(spec, kDown);
    const std::vector<ObservableSpec> obs = {ObservableSpec::mean_excitation()};
    const auto cfg = grid(0.01, 10.0, 5);
    const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(20000, 71));
    const auto ref = exact(spec, sampler, 0, cfg.output_times(), obs, health);
    const double dev = max_abs_diff(row(twa, 0), row(ref.series, 0));
    out.detail << " driven max|dexc| " << fmt(dev, 3);
    out.require(dev <= 0.05, "driven deviation > 0.05");
  }
  const std::vector<ObservableSpec> rate = {ObservableSpec::emission_rate()};
  {
    AtomArrayParams p;
    p.n = 8;
    p.spacing = 0.1;
    const auto spec = build_atom_array(p);
    const auto sampler = all_spins(spec, kUp);
    const auto cfg = grid(0.005, 4.0, 4);
    const auto twa = run_ensemble(spec, sampler, cfg, rate, samples(20000, 72));
    const auto ref = exact(spec, sampler, 0, cfg.output_times(), rate, health);
    const double a = row(twa, 0).maxCoeff(), b = row(ref.series, 0).maxCoeff();
    const double rel = std::abs(a - b) / b;
    const double r0 = twa.mean(0, 0), se0 = twa.std_error(0, 0);
    out.detail << " | burst peak twa " << fmt(a) << " exact " << fmt(b) << " rel " << fmt(rel, 2) << " R(0) "
               << fmt(r0, 5) << "+-" << fmt(se0, 2);
    out.require(rel <= 0.10, "burst peak relative error > 10%");
    out.require(std::abs(r0 - 1.0) <= 3.0 * se0, "R(0) not within 3 standard errors of 1");
  }
  {
    AtomArrayParams p;
    p.n = 200;
    p.spacing = 0.1;
    const auto spec = build_atom_array(p);
    const auto sampler = all_spins(spec, kUp);
    const auto cfg = grid(0.01, 2.0, 5);
    const auto twa = run_ensemble(spec, sampler, cfg, rate, samples(512, 73));
    const Eigen::VectorXd r = row(twa, 0);
    const Eigen::VectorXd se = twa.std_error.row(0).transpose();
    Eigen::Index peak = 0;
    r.maxCoeff(&peak);
    // Past the peak, no rise beyond the combined noise of neighbouring points.
    bool monotone = peak + 4 < r.size();
    for (Eigen::Index i = peak + 1; i + 1 < r.size(); ++i) {
      monotone = monotone && r(i + 1) <= r(i) + 3.0 * std::hypot(se(i), se(i + 1));
    }
    out.detail << " | N=200 R(0) " << fmt(r(0), 5) << "+-" << fmt(se(0), 2) << " peak " << fmt(r(peak))
               << " at t=" << fmt(twa.times[static_cast<std::size_t>(peak)], 3) << " final " << fmt(r(r.size() - 1));
    out.require(std::abs(r(0) - 1.0) <= 3.0 * se(0), "N=200 R(0) not within 3 standard errors of 1");
    out.require(monotone, "N=200 tail not monotone");
  }
  health.check(out);
  return out;
}

// 8. Steady variance of sigma^x for a large driven spin against the
// first-order noise estimate.
Outcome large_spin_variance() {
  Outcome out;
  const double spin = 10.0, gamma = 1.0;
  const double norm = 1.0 / (2.0 * spin);
  const std::vector<ObservableSpec> obs = {
      ObservableSpec::custom("x", norm * sx(0)),
      ObservableSpec::custom("x2", norm * norm * sx(0) * sx(0)),
      ObservableSpec::custom("x3", norm * norm * norm * sx(0) * sx(0) * sx(0)),
      ObservableSpec::custom("x4", norm * norm * norm * norm * sx(0) * sx(0) * sx(0) * sx(0)),
  };
  const auto cfg = grid(0.05, 40.0, 800);
  for (double ratio : {0.1, 0.2, 0.3, 0.4}) {
    DrivenSpinParams p;
    p.spin_size = spin;
    p.gamma_down = gamma;
    p.rescale_decay = true;
    p.omega = ratio * gamma / 4.0;
    const auto spec = build_driven_spin(p);
    SamplerSpec sampler;
    sampler.spins = {{SpinScheme::Continuous, kDown, spin}};
    const std::size_t n = 100000;
    const auto twa = run_ensemble(spec, sampler, cfg, obs, samples(n, 81));
    const Eigen::Index last = static_cast<Eigen::Index>(twa.times.size()) - 1;
    const double m1 = twa.mean(0, last), m2 = twa.mean(1, last), m3 = twa.mean(2, last), m4 = twa.mean(3, last);
    const double var = m2 - m1 * m1;
    const double c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
    const double se = std::sqrt(std::max(c4 - var * var, 0.0) / static_cast<double>(n));
    const double expected = quantum_correction_estimate(spin, p.omega, gamma);
    out.detail << " W/Wc=" << ratio << " var " << fmt(var, 5) << "+-" << fmt(se, 2) << " vs " << fmt(expected, 5);
    out.require(std::abs(var - expected) <= 2.0 * se, "W/Wc=" + fmt(ratio) + " outside 2 standard errors");
  }
  return out;
}

// 9. Per-step noise statistics and the dissipation factor of an atom array.
Outcome noise_machinery() {
  Outcome out;
  AtomArrayParams p;
  p.n = 8;
  p.spacing = 0.1;
  const auto spec = build_atom_array(p);
  const auto sys = build_langevin(spec);
  const double factor_error =
      (sys.noise_factor.factor * sys.noise_factor.factor.adjoint() - sys.gamma).cwiseAbs().maxCoeff();

  const NoiseMixer mixer(sys);
  const auto m = static_cast<Eigen::Index>(mixer.components());
  const double dt = 0.01;
  const int n = 200000;
  auto rng = make_stream(9, StreamKind::Noise, 0);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd xi(m);
  for (int i = 0; i < n; ++i) {
    mixer.draw(rng, gauss, dt, xi.data());
    sum.selfadjointView<Eigen::Lower>().rankUpdate(xi);
  }
  const Eigen::MatrixXd cov = Eigen::MatrixXd(sum.selfadjointView<Eigen::Lower>()) / static_cast<double>(n);
  double worst_z = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const NoiseComponent ca{static_cast<std::size_t>(a / 2), static_cast<NoiseAxis>(a % 2)};
      const NoiseComponent cb{static_cast<std::size_t>(b / 2), static_cast<NoiseAxis>(b % 2)};
      const double expected = noise_covariance(sys.gamma, ca, cb) / dt;
      const double va = noise_covariance(sys.gamma, ca, ca) / dt, vb = noise_covariance(sys.gamma, cb, cb) / dt;
      const double se = std::sqrt((va * vb + expected * expected) / n);
      worst_z = std::max(worst_z, std::abs(cov(a, b) - expected) / se);
    }
  }
  out.detail << " |BB^+ - Gamma| " << fmt(factor_error, 2) << " worst covariance z " << fmt(worst_z, 3) << " over "
             << m * m << " entries";
  out.require(factor_error <= 1e-10, "B B^dagger differs from Gamma");
  out.require(worst_z <= 5.0, "covariance outside 5 standard errors");
  return out;
}

std::vector<double> even_grid(double t_final, std::size_t n) {
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = t_final * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

// 10. Oracle against closed forms and its own invariants.
Outcome oracle_checks() {
  Outcome out;
  OracleHealth health;
  {
    const double gamma = 0.8;
    DrivenSpinParams p;
    p.omega = 0.0;
    p.gamma_down = gamma;
    const auto spec = build_driven_spin(p);
    const auto times = even_grid(5.0, 100);
    const auto r = exact(spec, all_spins(spec, kUp), 0, times, {ObservableSpec::spin(0, Axis::Z)}, health, 1e-3);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      err = std::max(err, std::abs(r.series.mean(0, static_cast<Eigen::Index>(i)) -
                                   (2.0 * std::exp(-gamma * times[i]) - 1.0)));
    }
    out.detail << " damping " << fmt(err, 2);
    out.require(err <= 1e-8, "amplitude damping error > 1e-8");
  }
  {
    const double omega = 0.7, gamma = 1.3;
    DrivenSpinParams p;
    p.omega = omega;
    p.gamma_down = gamma;
    const auto spec = build_driven_spin(p);
    const auto r = exact(spec, all_spins(spec, kDown), 0, even_grid(40.0, 4), {ObservableSpec::spin(0, Axis::Z)},
                         health);
    const double err = std::abs(r.series.mean(0, 4) + gamma * gamma / (gamma * gamma + 8.0 * omega * omega));
    out.detail << " bloch " << fmt(err, 2);
    out.require(err <= 1e-6, "optical Bloch steady state error > 1e-6");
  }
  {
    AtomArrayParams p;
    p.n = 4;
    p.spacing = 0.15;
    p.omega = 0.6;
    ModelSpec spec = build_atom_array(p);
    // Complex off-diagonal entry; the diagonal shift keeps Gamma PSD.
    spec.gamma += 0.1 * Eigen::MatrixXcd::Identity(4, 4);
    spec.gamma(0, 2) = Complex(spec.gamma(0, 2).real(), 0.05);
    spec.gamma(2, 0) = std::conj(spec.gamma(0, 2));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(spec.gamma);
    ModelSpec diag = spec;
    diag.jumps.clear();
    diag.gamma = Eigen::MatrixXcd::Zero(spec.gamma.rows(), spec.gamma.cols());
    for (Eigen::Index k = 0; k < spec.gamma.rows(); ++k) {
      ClassicalExpr jump;
      for (Eigen::Index i = 0; i < spec.gamma.rows(); ++i) {
        jump += std::conj(solver.eigenvectors()(i, k)) * spec.jumps[static_cast<std::size_t>(i)];
      }
      diag.jumps.push_back(jump);
      diag.gamma(k, k) = solver.eigenvalues()(k);
    }
    const auto sampler = all_spins(spec, Eigen::Vector3d(0.6, 0.0, 0.8));
    const std::vector<ObservableSpec> obs = {ObservableSpec::spin(0, Axis::Z), ObservableSpec::spin(1, Axis::Y),
                                             ObservableSpec::two_point(0, Axis::X, 3, Axis::X)};
    const auto times = even_grid(3.0, 30);
    const auto a = exact(spec, sampler, 0, times, obs, health, 2e-3);
    const auto b = exact(diag, sampler, 0, times, obs, health, 2e-3);
    const double err = (a.series.mean - b.series.mean).cwiseAbs().maxCoeff();
    out.detail << " diagonal basis " << fmt(err, 2);
    out.require(err <= 1e-9, "diagonal-basis mismatch > 1e-9");
  }
  {
    // Largest-norm generator of the suite, run into the steady state.
    TavisCummingsParams p;
    p.n = 4;
    p.g = 0.9;
    p.kappa = 1.0;
    p.gamma_down = 0.125;
    p.gamma_up = 0.375;
    const auto spec = build_tavis_cummings(p);
    exact(spec, all_spins(spec, kUp), 12, even_grid(30.0, 60), {ObservableSpec::photon_number()}, health);
  }
  health.check(out);
  return out;
}

// 11. Bracket identities on random polynomials; excitation number of the
// closed Tavis-Cummings model.
Outcome algebra_properties() {
  Outcome out;
  std::mt19937_64 rng(11);
  int failures = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto f = testing::random_expr(rng, 2, 1, 3, 2);
    const auto g = testing::random_expr(rng, 2, 1, 3, 2);
    const auto h = testing::random_expr(rng, 2, 1, 3, 2);
    if (poisson_bracket(f, g) != -poisson_bracket(g, f)) ++failures;
    if (poisson_bracket(f, g * h) != poisson_bracket(f, g) * h + g * poisson_bracket(f, h)) ++failures;
    const auto jacobi = poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f)) +
                        poisson_bracket(h, poisson_bracket(f, g));
    if (!jacobi.is_zero()) ++failures;
  }
  TavisCummingsParams p;
  p.n = 5;
  p.omega = 1.0;
  p.epsilon = 1.0;
  p.g = 0.9;
  const auto spec = build_tavis_cummings(p);
  ClassicalExpr excitations = amp_conj(0) * amp(0);
  for (std::uint32_t i = 0; i < 5; ++i) excitations += 0.5 * sz(i);
  const bool conserved = poisson_bracket(excitations, spec.hamiltonian).is_zero();
  out.detail << " " << 3 * trials << " identities, " << failures << " failures; TC excitation bracket "
             << (conserved ? "zero" : "nonzero");
  out.require(failures == 0, "bracket identity violated");
  out.require(conserved, "excitation number not conserved");
  return out;
}

// 12. CSV bytes do not depend on the thread count.
Outcome determinism() {
  Outcome out;
  TavisCummingsParams p;
  p.n = 3;
  p.g = 0.9;
  p.kappa = 1.0;
  p.gamma_down = 0.125;
  p.gamma_up = 0.375;
  const auto spec = build_tavis_cummings(p);
  const auto sampler = all_spins(spec, kUp);
  const std::vector<ObservableSpec> obs = {ObservableSpec::photon_number(), ObservableSpec::mean_spin(Axis::Z),
                                           ObservableSpec::two_point(0, Axis::X, 1, Axis::X)};
  const auto cfg = grid(0.02, 4.0, 10);
  std::string reference;
  bool identical = true;
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    auto e = samples(1000, 12);
    e.threads = threads;
    std::ostringstream csv;
    write_csv(run_ensemble(spec, sampler, cfg, obs, e), csv);
    if (reference.empty()) {
      reference = csv.str();
    } else {
      identical = identical && csv.str() == reference;
    }
  }
  out.detail << " threads 1/2/3/8 " << (identical ? "byte-identical" : "differ") << " (" << reference.size()
             << " bytes)";
  out.require(identical, "CSV differs between thread counts");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no stated budget
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "driven spin", 60, driven_spin},
      {2, "channel equations", 0, channel_equations},
      {3, "spin length", 0, spin_length},
      {4, "tavis-cummings", 300, tavis_cummings},
      {5, "central spin", 300, central_spin},
      {6, "rydberg chain", 600, rydberg_chain},
      {7, "atom arrays", 1800, atom_arrays},
      {8, "large-spin variance", 120, large_spin_variance},
      {9, "noise machinery", 0, noise_machinery},
      {10, "oracle self-checks", 0, oracle_checks},
      {11, "bracket algebra", 0, algebra_properties},
      {12, "determinism", 0, determinism},
  };
  return list;
}

bool run(const Criterion& c) {
  const unsigned hw = std::thread::hardware_concurrency();
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = c.run();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string timing = fmt(seconds, 3) + " s";
  if (c.budget_seconds > 0.0) {
    timing += " / budget " + fmt(c.budget_seconds, 4) + " s";
    if (hw >= kBudgetThreads) {
      out.require(seconds <= c.budget_seconds, "over budget");
    } else {
      timing += " (not enforced, " + std::to_string(hw) + " hw threads)";
    }
  }
  std::cout << (out.pass ? "PASS" : "FAIL") << "  C" << c.id << " " << c.name << ":" << out.detail.str() << " | "
            << timing << std::endl;
  return out.pass;
}

}  // namespace
}  // namespace twa::acceptance

int main(int argc, char** argv) {
  using namespace twa::acceptance;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long id = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || id < 1 || id > static_cast<long>(criteria().size())) {
      std::cerr << "usage: twa_acceptance [criterion ...]  (1-" << criteria().size() << ")\n";
      return 2;
    }
    selected.push_back(static_cast<int>(id));
  }
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (selected.empty() || std::find(selected.begin(), selected.end(), c.id) != selected.end()) {
      all_pass = run(c) && all_pass;
    }
  }
  return all_pass ? 0 : 1;
}
