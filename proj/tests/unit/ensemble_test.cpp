#include <gtest/gtest.h>

#include <sstream>

#include <twa/ensemble.hpp>
#include <twa/errors.hpp>
#include <twa/models.hpp>

namespace twa {
namespace {

std::string csv_of(const ObservableSeries& s) {
  std::ostringstream os;
  write_csv(s, os);
  return os.str();
}

struct DrivenRun {
  ModelSpec spec;
  SamplerSpec sampler;
  IntegratorConfig config;
  std::vector<ObservableSpec> observables;
  EnsembleConfig ensemble;

  DrivenRun() {
    DrivenSpinParams p;
    p.omega = 1.0;
    p.gamma_down = 0.5;
    spec = build_driven_spin(p);
    sampler = SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d(0, 0, -1));
    config.dt = 0.02;
    config.t_final = 2.0;
    config.output_stride = 5;
    observables = {ObservableSpec::spin(0, Axis::Z), ObservableSpec::spin(0, Axis::X)};
    ensemble.n_total = 1000;
    ensemble.seed = 11;
  }

  ObservableSeries run() const { return run_ensemble(spec, sampler, config, observables, ensemble); }
};

TEST(Ensemble, ByteIdenticalAcrossThreadCounts) {
  DrivenRun r;
  r.ensemble.threads = 1;
  const std::string one = csv_of(r.run());
  for (unsigned t : {2u, 3u, 7u}) {
    r.ensemble.threads = t;
    EXPECT_EQ(csv_of(r.run()), one) << t << " threads";
  }
}

TEST(Ensemble, SeedChangesResult) {
  DrivenRun r;
  const auto a = csv_of(r.run());
  r.ensemble.seed = 12;
  EXPECT_NE(csv_of(r.run()), a);
}

TEST(Ensemble, InitialValuesAreExactForDiscreteSampling) {
  DrivenRun r;
  const auto s = r.run();
  EXPECT_EQ(s.mean(0, 0), -1.0);
  EXPECT_EQ(s.std_error(0, 0), 0.0);
  EXPECT_NEAR(s.mean(1, 0), 0.0, 5.0 * s.std_error(1, 0));
  EXPECT_EQ(s.n_total, 1000u);
  EXPECT_EQ(s.n_failed, 0u);
  EXPECT_EQ(s.names, (std::vector<std::string>{"sz[0]", "sx[0]"}));
}

TEST(Ensemble, MergedSamplingSharesInitialStates) {
  DrivenRun r;
  r.ensemble.n_total = 12;
  r.ensemble.n_initial = 3;
  for (std::size_t i = 0; i < 12; ++i) {
    const auto s = initial_state(r.sampler, r.ensemble, i);
    const auto first = initial_state(r.sampler, r.ensemble, (i / 4) * 4);
    EXPECT_EQ(s.spins[0], first.spins[0]);
  }
  r.ensemble.n_initial = 5;
  EXPECT_THROW(r.ensemble.validate(), InvalidParameter);
}

TEST(Ensemble, MergedSamplingIsUnbiased) {
  DrivenRun r;
  r.ensemble.n_total = 4000;
  const auto fresh = r.run();
  r.ensemble.n_initial = 1000;
  const auto merged = r.run();
  const auto last = static_cast<Eigen::Index>(fresh.times.size() - 1);
  const double se = std::hypot(fresh.std_error(0, last), merged.std_error(0, last));
  EXPECT_NEAR(fresh.mean(0, last), merged.mean(0, last), 5.0 * se);
}

TEST(MomentGrid, MergeMatchesSequentialAccumulation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(3.0, 2.0);
  MomentGrid all(2, 3), left(2, 3), right(2, 3);
  std::vector<double> v(6);
  for (int i = 0; i < 500; ++i) {
    for (auto& x : v) x = gauss(rng);
    all.add(v.data());
    (i < 137 ? left : right).add(v.data());
  }
  left.merge(right);
  const auto a = all.finish({0.0, 1.0}, {"a", "b", "c"}, {0.0, 0.0, 0.0});
  const auto b = left.finish({0.0, 1.0}, {"a", "b", "c"}, {0.0, 0.0, 0.0});
  EXPECT_EQ(b.n_total, 500u);
  EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.std_error - b.std_error).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ensemble, RunawayTrajectoriesAbort) {
  ModelSpec spec;
  spec.layout.n_bosons = 1;
  spec.hamiltonian = 0.5 * amp_conj(0) * amp_conj(0) * amp(0) * amp(0);
  spec.gamma.resize(0, 0);
  SamplerSpec sampler;
  sampler.bosons = {Complex(1e3, 0.0)};
  IntegratorConfig config;
  config.dt = 1.0;
  config.t_final = 10.0;
  EnsembleConfig ens;
  ens.n_total = 8;
  EXPECT_THROW(run_ensemble(spec, sampler, config, {ObservableSpec::photon_number()}, ens), EnsembleAborted);
}

TEST(Ensemble, PhotonNumberUsesSymmetricOrderingCorrection) {
  TavisCummingsParams p;
  p.n = 1;
  p.g = 0.0;
  p.kappa = 1.0;
  const auto spec = build_tavis_cummings(p);
  const auto sampler = SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d(0, 0, 1));
  IntegratorConfig config;
  config.dt = 0.01;
  config.t_final = 0.5;
  EnsembleConfig ens;
  ens.n_total = 20000;
  const auto s = run_ensemble(spec, sampler, config, {ObservableSpec::photon_number()}, ens);
  // Vacuum stays vacuum.
  for (Eigen::Index t = 0; t < s.mean.cols(); ++t) EXPECT_NEAR(s.mean(0, t), 0.0, 5.0 * s.std_error(0, t));
}

TEST(Observables, NamesAndValidation) {
  EXPECT_EQ(ObservableSpec::spin(3, Axis::Y).name(), "sy[3]");
  EXPECT_EQ(ObservableSpec::two_point(0, Axis::X, 1, Axis::Z).name(), "sx[0]*sz[1]");
  EXPECT_EQ(ObservableSpec::photon_number().name(), "n_photon[0]");
  EXPECT_EQ(ObservableSpec::central_population().name(), "central_population");
  EXPECT_EQ(ObservableSpec::emission_rate().name(), "emission_rate");
  EXPECT_EQ(ObservableSpec::mean_excitation().name(), "mean_excitation");
  EXPECT_EQ(ObservableSpec::mean_spin(Axis::Z).name(), "mean_sz");

  DrivenSpinParams p;
  const auto spec = build_driven_spin(p);
  EXPECT_THROW(ObservableSpec::spin(1, Axis::Z).validate(spec), InvalidParameter);
  EXPECT_THROW(ObservableSpec::photon_number().validate(spec), InvalidParameter);
  EXPECT_THROW(ObservableSpec::custom("bad", amp(0)).validate(spec), UnknownVariable);
}

TEST(EmissionRate, FullyInvertedArrayStartsAtOne) {
  AtomArrayParams p;
  p.n = 6;
  p.spacing = 0.1;
  const auto spec = build_atom_array(p);
  const auto sampler = SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d(0, 0, 1));
  EnsembleConfig ens;
  ens.n_total = 40000;
  std::vector<PhaseSpaceState> states;
  for (std::size_t i = 0; i < ens.n_total; ++i) states.push_back(initial_state(sampler, ens, i));
  const double r0 = emission_rate(states, spec.gamma, p.gamma0);
  EXPECT_NEAR(r0, 1.0, 0.02);

  // The compiled observable gives the same number.
  IntegratorConfig config;
  config.dt = 0.01;
  config.t_final = 0.01;
  const auto s = run_ensemble(spec, sampler, config, {ObservableSpec::emission_rate()}, ens);
  EXPECT_NEAR(s.mean(0, 0), r0, 1e-12);
  EXPECT_NEAR(s.mean(0, 0), 1.0, 3.0 * s.std_error(0, 0));
}

TEST(EmissionRate, GroundStateIsDark) {
  AtomArrayParams p;
  p.n = 4;
  p.spacing = 0.2;
  const auto spec = build_atom_array(p);
  const auto sampler = SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d(0, 0, -1));
  EnsembleConfig ens;
  ens.n_total = 40000;
  IntegratorConfig config;
  config.dt = 0.01;
  config.t_final = 0.01;
  const auto s = run_ensemble(spec, sampler, config, {ObservableSpec::emission_rate()}, ens);
  EXPECT_NEAR(s.mean(0, 0), 0.0, 3.0 * s.std_error(0, 0) + 1e-12);
}

}  // namespace
}  // namespace twa
