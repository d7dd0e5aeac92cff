#include <benchmark/benchmark.h>

#include <random>

#include <twa/algebra.hpp>
#include <twa/ensemble.hpp>
#include <twa/integrator.hpp>
#include <twa/models.hpp>
#include <twa/oracle.hpp>

namespace {

using namespace twa;

ClassicalExpr chain_polynomial(std::uint32_t n) {
  ClassicalExpr e;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    e += 0.7 * sx(i) + 1.3 * sz(i) * sz(j) + 0.2 * sx(i) * sy(j) * sz(i);
  }
  return e;
}

void BM_PoissonBracket(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const ClassicalExpr h = chain_polynomial(n);
  const ClassicalExpr f = sx(0) * sz(n / 2) + sy(n - 1);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_bracket(h, f));
}
BENCHMARK(BM_PoissonBracket)->Arg(8)->Arg(64);

void BM_BuildLangevin(benchmark::State& state) {
  AtomArrayParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.spacing = 0.1;
  const ModelSpec spec = build_atom_array(p);
  for (auto _ : state) benchmark::DoNotOptimize(build_langevin(spec));
}
BENCHMARK(BM_BuildLangevin)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void step_benchmark(benchmark::State& state, const ModelSpec& spec, const SamplerSpec& sampler, double dt) {
  const LangevinSystem sys = build_langevin(spec);
  const Stepper stepper(sys);
  auto ws = stepper.workspace();
  IntegratorConfig config;
  EnsembleConfig ens;
  PhaseSpaceState s = initial_state(sampler, ens, 0);
  auto rng = make_stream(1, StreamKind::Noise, 0);
  std::normal_distribution<double> gauss;
  for (auto _ : state) {
    stepper.mixer().draw(rng, gauss, dt, ws.noise.data());
    if (!stepper.step(s, ws.noise.data(), dt, config, ws)) s = initial_state(sampler, ens, 0);
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["terms"] = static_cast<double>(stepper.compiled_terms());
}

void BM_StepDrivenSpin(benchmark::State& state) {
  DrivenSpinParams p;
  p.gamma_down = 0.5;
  const ModelSpec spec = build_driven_spin(p);
  step_benchmark(state, spec, SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, -Eigen::Vector3d::UnitZ()),
                 0.02);
}
BENCHMARK(BM_StepDrivenSpin);

void BM_StepTavisCummings(benchmark::State& state) {
  TavisCummingsParams p;
  p.n = 4;
  p.g = 0.9;
  p.kappa = 1.0;
  p.gamma_down = 0.125;
  p.gamma_up = 0.375;
  const ModelSpec spec = build_tavis_cummings(p);
  step_benchmark(state, spec, SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d::UnitZ()),
                 0.02);
}
BENCHMARK(BM_StepTavisCummings);

void BM_StepAtomArray(benchmark::State& state) {
  AtomArrayParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.spacing = 0.1;
  const ModelSpec spec = build_atom_array(p);
  step_benchmark(state, spec, SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d::UnitZ()),
                 0.01);
}
BENCHMARK(BM_StepAtomArray)->Arg(8)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_LiouvillianApply(benchmark::State& state) {
  TavisCummingsParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.g = 0.9;
  p.kappa = 1.0;
  p.gamma_down = 0.125;
  p.gamma_up = 0.375;
  const ModelSpec spec = build_tavis_cummings(p);
  const auto layout = HilbertLayout::for_model(spec.layout, 12);
  const Liouvillian l(build_operators(spec, layout));
  const Eigen::MatrixXcd rho =
      product_state(SamplerSpec::uniform(spec.layout, SpinScheme::Discrete, Eigen::Vector3d::UnitZ()), layout);
  Eigen::MatrixXcd out;
  for (auto _ : state) {
    l.apply(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["dimension"] = static_cast<double>(rho.rows());
}
BENCHMARK(BM_LiouvillianApply)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
