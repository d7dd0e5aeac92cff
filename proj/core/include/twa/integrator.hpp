#pragma once

// Stratonovich implicit-midpoint integration of one trajectory.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

#include "twa/langevin.hpp"
#include "twa/polynomial_set.hpp"
#include "twa/sampling.hpp"

namespace twa {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  int fixed_point_iters = 4;
  double fixed_point_tol = 1e-12;
  std::size_t output_stride = 1;

  void validate() const;
  std::size_t n_steps() const;
  /// t = k * output_stride * dt for every recorded step, starting at 0.
  std::vector<double> output_times() const;
};

/// Draws the real noise components of one step. Component 2i+a is axis a of
/// channel i; per-step covariance is cov(Gamma) / dt.
class NoiseMixer {
 public:
  NoiseMixer() = default;
  explicit NoiseMixer(const LangevinSystem& sys);

  std::size_t components() const noexcept { return 2 * n_channels_; }
  /// Independent standard normals consumed per draw.
  std::size_t draws() const noexcept { return 2 * rates_.size(); }
  void draw(Rng& rng, std::normal_distribution<double>& gauss, double dt, double* out) const;
  void draw(Rng& rng, double dt, double* out) const;

 private:
  std::size_t n_channels_ = 0;
  bool diagonal_ = true;
  // Diagonal: (channel, sqrt(rate)) per active channel.
  std::vector<std::size_t> channels_;
  std::vector<double> rates_;
  // Dense: Gamma = B B^dagger with B = real + i imag over active modes.
  Eigen::MatrixXd real_;
  Eigen::MatrixXd imag_;
};

/// Compiled right-hand side of a LangevinSystem. Immutable and shareable
/// between threads; scratch memory lives in Workspace.
class Stepper {
 public:
  struct Workspace {
    std::vector<double> real_in, real_out;
    std::vector<Complex> complex_in, complex_out;
    std::vector<Eigen::Vector3d> spins0;
    std::vector<Complex> bosons0;
    std::vector<double> noise;
  };

  explicit Stepper(const LangevinSystem& sys);

  const LangevinSystem& system() const noexcept { return *sys_; }
  const NoiseMixer& mixer() const noexcept { return mixer_; }
  std::size_t noise_components() const noexcept { return mixer_.components(); }
  std::size_t compiled_terms() const noexcept;
  bool complex_path() const noexcept { return complex_; }

  Workspace workspace() const;

  /// One implicit-midpoint step with noise held constant over the step.
  /// Returns false if the new state is not finite or a spin ran away.
  bool step(PhaseSpaceState& state, const double* noise, double dt, const IntegratorConfig& config,
            Workspace& ws) const;

 private:
  template <typename Scalar>
  void solve(PhaseSpaceState& state, const double* noise, double dt,
             const IntegratorConfig& config, const PolynomialSet<Scalar>& set,
             std::vector<Scalar>& in, std::vector<Scalar>& out, Workspace& ws) const;

  const LangevinSystem* sys_;
  NoiseMixer mixer_;
  bool complex_ = false;
  std::size_t n_spins_ = 0, n_bosons_ = 0, noise_offset_ = 0, n_inputs_ = 0;
  std::vector<double> spin_bound_;
  PolynomialSet<double> real_set_;
  PolynomialSet<Complex> complex_set_;
};

using SampleCallback = std::function<void(std::size_t record, double t, const PhaseSpaceState&)>;

/// Integrates from `initial`, calling `on_sample` at every recorded time.
/// Throws NonFiniteState carrying the failing time.
void integrate_trajectory(PhaseSpaceState state, const Stepper& stepper,
                          const IntegratorConfig& config, Rng& rng, const SampleCallback& on_sample,
                          Stepper::Workspace& ws);

/// Convenience form returning every recorded state.
std::vector<PhaseSpaceState> integrate_trajectory(const PhaseSpaceState& initial,
                                                  const LangevinSystem& sys,
                                                  const IntegratorConfig& config, Rng& rng);

}  // namespace twa
