#include "twa/sampling.hpp"

#include <cmath>

#include "twa/errors.hpp"

namespace twa {

Rng make_stream(std::uint64_t seed, StreamKind kind, std::uint64_t index) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(kind), lo(index), hi(index)};
  return Rng(seq);
}

std::string to_string(SpinScheme scheme) {
  switch (scheme) {
    case SpinScheme::Discrete:
      return "discrete";
    case SpinScheme::Continuous:
      return "continuous";
    default:
      return "classical";
  }
}

SpinScheme parse_spin_scheme(const std::string& name) {
  if (name == "discrete") return SpinScheme::Discrete;
  if (name == "continuous") return SpinScheme::Continuous;
  if (name == "classical") return SpinScheme::Classical;
  throw InvalidParameter("unknown sampling scheme '" + name +
                         "' (expected discrete, continuous or classical)");
}

SamplerSpec SamplerSpec::uniform(const SystemLayout& layout, SpinScheme scheme,
                                 const Eigen::Vector3d& direction, std::vector<Complex> bosons) {
  SamplerSpec out;
  out.spins.resize(layout.n_spins);
  for (std::size_t k = 0; k < layout.n_spins; ++k) {
    out.spins[k] = {scheme, direction, layout.spin_size(k)};
  }
  out.bosons = std::move(bosons);
  out.bosons.resize(layout.n_bosons, Complex(0.0));
  return out;
}

void SamplerSpec::validate(const SystemLayout& layout) const {
  if (spins.size() != layout.n_spins) {
    throw InvalidParameter("sampler has " + std::to_string(spins.size()) + " spins, model has " +
                           std::to_string(layout.n_spins));
  }
  if (bosons.size() != layout.n_bosons) {
    throw InvalidParameter("sampler has " + std::to_string(bosons.size()) +
                           " boson modes, model has " + std::to_string(layout.n_bosons));
  }
  for (std::size_t k = 0; k < spins.size(); ++k) {
    const auto& sp = spins[k];
    if (std::abs(sp.direction.norm() - 1.0) > 1e-12) {
      throw InvalidParameter("initial direction of spin " + std::to_string(k) + " is not a unit vector");
    }
    if (std::abs(sp.spin_size - layout.spin_size(k)) > 1e-12) {
      throw InvalidParameter("spin size of site " + std::to_string(k) + " differs from the model");
    }
    if (sp.scheme == SpinScheme::Discrete && sp.spin_size != 0.5) {
      throw InvalidParameter("discrete sampling requires S = 1/2 (site " + std::to_string(k) + ")");
    }
  }
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> transverse_frame(const Eigen::Vector3d& n) {
  const Eigen::Vector3d helper =
      std::abs(n.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = helper.cross(n).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  return {e1, e2};
}

Eigen::Vector3d sample_discrete(const Eigen::Vector3d& n, Rng& rng) {
  const auto [e1, e2] = transverse_frame(n);
  const std::uint64_t bits = rng();
  const double r1 = (bits & 1u) ? 1.0 : -1.0;
  const double r2 = (bits & 2u) ? 1.0 : -1.0;
  return n + r1 * e1 + r2 * e2;
}

Eigen::Vector3d sample_continuous(const Eigen::Vector3d& n, double spin_size, Rng& rng) {
  const auto [e1, e2] = transverse_frame(n);
  std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 * spin_size));
  const double g1 = gauss(rng);
  const double g2 = gauss(rng);
  return 2.0 * spin_size * n + g1 * e1 + g2 * e2;
}

Complex sample_boson_coherent(Complex alpha, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 0.5);
  const double re = gauss(rng);
  const double im = gauss(rng);
  return alpha + Complex(re, im);
}

PhaseSpaceState sample_state(const SamplerSpec& spec, Rng& rng) {
  PhaseSpaceState out;
  out.spins.reserve(spec.spins.size());
  for (const auto& sp : spec.spins) {
    switch (sp.scheme) {
      case SpinScheme::Discrete:
        out.spins.push_back(sample_discrete(sp.direction, rng));
        break;
      case SpinScheme::Continuous:
        out.spins.push_back(sample_continuous(sp.direction, sp.spin_size, rng));
        break;
      case SpinScheme::Classical:
        out.spins.push_back(2.0 * sp.spin_size * sp.direction);
        break;
    }
  }
  out.bosons.reserve(spec.bosons.size());
  for (Complex alpha : spec.bosons) out.bosons.push_back(sample_boson_coherent(alpha, rng));
  return out;
}

}  // namespace twa
