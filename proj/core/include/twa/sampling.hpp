#pragma once

// Initial phase-space ensembles and per-trajectory random streams.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twa/algebra.hpp"
#include "twa/langevin.hpp"

namespace twa {

using Rng = std::mt19937_64;

enum class StreamKind : std::uint64_t { Initial = 1, Noise = 2 };

/// Independent generator for (master seed, stream kind, index). The mapping
/// is fixed so a trajectory's numbers never depend on scheduling.
Rng make_stream(std::uint64_t seed, StreamKind kind, std::uint64_t index);

enum class SpinScheme { Discrete, Continuous, Classical };

std::string to_string(SpinScheme scheme);
SpinScheme parse_spin_scheme(const std::string& name);

struct SpinInit {
  SpinScheme scheme = SpinScheme::Discrete;
  Eigen::Vector3d direction = -Eigen::Vector3d::UnitZ();
  double spin_size = 0.5;
};

struct SamplerSpec {
  std::vector<SpinInit> spins;
  std::vector<Complex> bosons;  // coherent amplitude per mode

  /// Same initialization on every site, vacuum-free coherent states per mode.
  static SamplerSpec uniform(const SystemLayout& layout, SpinScheme scheme,
                             const Eigen::Vector3d& direction, std::vector<Complex> bosons = {});

  /// Throws InvalidParameter when sizes, norms or schemes are inconsistent.
  void validate(const SystemLayout& layout) const;
};

struct PhaseSpaceState {
  std::vector<Eigen::Vector3d> spins;
  std::vector<Complex> bosons;
};

/// Deterministic orthonormal pair (e1, e2) with e1 x e2 = n.
std::pair<Eigen::Vector3d, Eigen::Vector3d> transverse_frame(const Eigen::Vector3d& n);

/// n plus independent +-1 components along the transverse frame.
Eigen::Vector3d sample_discrete(const Eigen::Vector3d& n, Rng& rng);

/// 2S n plus Gaussian transverse components of variance 2S.
Eigen::Vector3d sample_continuous(const Eigen::Vector3d& n, double spin_size, Rng& rng);

/// alpha plus complex Gaussian noise with variance 1/4 per quadrature.
Complex sample_boson_coherent(Complex alpha, Rng& rng);

PhaseSpaceState sample_state(const SamplerSpec& spec, Rng& rng);

}  // namespace twa
