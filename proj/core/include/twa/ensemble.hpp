#pragma once

// Parallel trajectory ensembles with deterministic streaming statistics.

#include <cstdint>
#include <vector>

#include "twa/integrator.hpp"
#include "twa/langevin.hpp"
#include "twa/observables.hpp"
#include "twa/sampling.hpp"
#include "twa/series.hpp"

namespace twa {

struct EnsembleConfig {
  std::size_t n_total = 1000;
  /// Distinct initial samples; each is paired with n_total / n_initial noise
  /// streams. 0 draws a fresh initial sample for every trajectory.
  std::size_t n_initial = 0;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t block_size = 64;
  double max_failure_fraction = 1e-3;

  void validate() const;
};

/// Streaming mean/variance over a time x observable grid.
class MomentGrid {
 public:
  MomentGrid() = default;
  MomentGrid(std::size_t n_times, std::size_t n_obs);

  void add(const double* values);  // n_times * n_obs, time-major
  /// Pairwise combination; `other` counts as the later samples.
  void merge(const MomentGrid& other);

  std::size_t count() const noexcept { return count_; }
  ObservableSeries finish(std::vector<double> times, std::vector<std::string> names,
                          const std::vector<double>& corrections) const;

 private:
  std::size_t n_times_ = 0, n_obs_ = 0, count_ = 0;
  std::vector<double> mean_, m2_;
};

/// Runs n_total trajectories and averages the observables on the output grid.
/// Throws EnsembleAborted when more than max_failure_fraction of the
/// trajectories leave the finite domain.
ObservableSeries run_ensemble(const ModelSpec& spec, const SamplerSpec& sampler,
                              const IntegratorConfig& config,
                              const std::vector<ObservableSpec>& observables,
                              const EnsembleConfig& ensemble);

/// Same, with the Langevin system already built from `spec`.
ObservableSeries run_ensemble(const ModelSpec& spec, const LangevinSystem& sys,
                              const SamplerSpec& sampler, const IntegratorConfig& config,
                              const std::vector<ObservableSpec>& observables,
                              const EnsembleConfig& ensemble);

/// Initial state of trajectory `index` under the merged sampling scheme.
PhaseSpaceState initial_state(const SamplerSpec& sampler, const EnsembleConfig& ensemble,
                              std::size_t index);

}  // namespace twa
