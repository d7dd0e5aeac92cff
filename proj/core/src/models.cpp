#include "twa/models.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "twa/errors.hpp"

namespace twa {

namespace {

constexpr double kPi = std::numbers::pi;

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidParameter(std::string(name) + " must be a finite non-negative rate");
  }
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) throw InvalidParameter(std::string(name) + " must be finite");
}

/// Accumulates jumps with diagonal rates; zero-rate channels are omitted.
struct JumpList {
  std::vector<ClassicalExpr> jumps;
  std::vector<std::string> labels;
  std::vector<double> rates;

  void add(ClassicalExpr jump, std::string label, double rate) {
    if (rate == 0.0) return;
    jumps.push_back(std::move(jump));
    labels.push_back(std::move(label));
    rates.push_back(rate);
  }

  void install(ModelSpec& spec) {
    const auto n = static_cast<Eigen::Index>(rates.size());
    spec.gamma = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) spec.gamma(i, i) = rates[static_cast<std::size_t>(i)];
    spec.jumps = std::move(jumps);
    spec.jump_labels = std::move(labels);
  }
};

std::string site_label(const char* what, std::size_t i) { return std::string(what) + "[" + std::to_string(i) + "]"; }

}  // namespace

ModelSpec build_driven_spin(const DrivenSpinParams& p) {
  require_finite(p.omega, "omega");
  require_non_negative(p.gamma_down, "gamma_down");
  require_non_negative(p.gamma_up, "gamma_up");
  const double twice = 2.0 * p.spin_size;
  if (p.spin_size <= 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
    throw InvalidParameter("spin_size must be a positive half-integer");
  }
  ModelSpec spec;
  spec.name = "driven_spin";
  spec.layout.n_spins = 1;
  if (p.spin_size != 0.5) spec.layout.spin_sizes = {p.spin_size};
  spec.hamiltonian = p.omega * sx(0);
  JumpList jumps;
  jumps.add(s_minus(0), "loss", p.rescale_decay ? p.gamma_down / twice : p.gamma_down);
  jumps.add(s_plus(0), "pump", p.gamma_up);
  jumps.install(spec);
  return spec;
}

ModelSpec build_tavis_cummings(const TavisCummingsParams& p) {
  if (p.n == 0) throw InvalidParameter("n must be at least 1");
  require_finite(p.omega, "omega");
  require_finite(p.epsilon, "epsilon");
  require_finite(p.g, "g");
  require_non_negative(p.kappa, "kappa");
  require_non_negative(p.gamma_down, "gamma_down");
  require_non_negative(p.gamma_up, "gamma_up");
  ModelSpec spec;
  spec.name = "tavis_cummings";
  spec.layout.n_spins = p.n;
  spec.layout.n_bosons = 1;
  const double gn = p.g / std::sqrt(static_cast<double>(p.n));
  ClassicalExpr h = p.omega * (amp_conj(0) * amp(0));
  for (std::uint32_t i = 0; i < p.n; ++i) {
    h += 0.5 * p.epsilon * sz(i);
    h += gn * (amp_conj(0) * s_minus(i) + amp(0) * s_plus(i));
  }
  spec.hamiltonian = std::move(h);
  JumpList jumps;
  jumps.add(amp(0), "photon_loss", p.kappa);
  for (std::uint32_t i = 0; i < p.n; ++i) jumps.add(s_minus(i), site_label("loss", i), p.gamma_down);
  for (std::uint32_t i = 0; i < p.n; ++i) jumps.add(s_plus(i), site_label("pump", i), p.gamma_up);
  jumps.install(spec);
  return spec;
}

ModelSpec build_central_spin(const CentralSpinParams& p) {
  if (p.n == 0) throw InvalidParameter("n must be at least 1");
  for (const auto* list : {&p.epsilons, &p.couplings, &p.losses}) {
    if (!list->empty() && list->size() != p.n) {
      throw InvalidParameter("per-site lists must have n = " + std::to_string(p.n) + " entries");
    }
  }
  require_finite(p.omega, "omega");
  require_non_negative(p.kappa, "kappa");
  require_non_negative(p.gamma_down, "gamma_down");
  require_non_negative(p.gamma_up, "gamma_up");
  for (double l : p.losses) require_non_negative(l, "losses");

  ModelSpec spec;
  spec.name = "central_spin";
  spec.layout.n_spins = p.n + 1;
  const double norm = 1.0 / std::sqrt(static_cast<double>(p.n));
  ClassicalExpr h = 0.5 * p.omega * sz(0);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto site = static_cast<std::uint32_t>(i + 1);
    const double eps = p.epsilons.empty() ? p.epsilon : p.epsilons[i];
    const double g = (p.couplings.empty() ? p.g : p.couplings[i]) * norm;
    h += 0.5 * eps * sz(site);
    h += g * (s_plus(0) * s_minus(site) + s_minus(0) * s_plus(site));
  }
  spec.hamiltonian = std::move(h);
  JumpList jumps;
  jumps.add(s_minus(0), "central_loss", p.kappa);
  for (std::size_t i = 0; i < p.n; ++i) {
    const double loss = p.losses.empty() ? p.gamma_down : p.losses[i];
    jumps.add(s_minus(static_cast<std::uint32_t>(i + 1)), site_label("loss", i + 1), loss);
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    jumps.add(s_plus(static_cast<std::uint32_t>(i + 1)), site_label("pump", i + 1), p.gamma_up);
  }
  jumps.install(spec);
  return spec;
}

ModelSpec build_rydberg_chain(const RydbergChainParams& p) {
  if (p.n < 2) throw InvalidParameter("n must be at least 2");
  require_finite(p.omega, "omega");
  require_finite(p.j, "j");
  require_non_negative(p.kappa, "kappa");
  require_non_negative(p.gamma_down, "gamma_down");
  ModelSpec spec;
  spec.name = "rydberg_chain";
  spec.layout.n_spins = p.n;
  ClassicalExpr h;
  for (std::uint32_t i = 0; i < p.n; ++i) {
    const auto next = static_cast<std::uint32_t>((i + 1) % p.n);
    h += p.omega * sx(i);
    h += 0.25 * p.j * ((1.0 + sz(i)) * (1.0 + sz(next)));
  }
  spec.hamiltonian = std::move(h);
  JumpList jumps;
  for (std::uint32_t i = 0; i < p.n; ++i) jumps.add(sz(i), site_label("dephasing", i), p.kappa);
  for (std::uint32_t i = 0; i < p.n; ++i) jumps.add(s_minus(i), site_label("loss", i), p.gamma_down);
  jumps.install(spec);
  return spec;
}

Eigen::Matrix3cd green_tensor(const Eigen::Vector3d& r, double omega) {
  const double dist = r.norm();
  if (dist == 0.0) throw ZeroDisplacement("green_tensor evaluated at zero displacement");
  const double k = omega;
  const Complex ikr(0.0, k * dist);
  const double kr2 = k * k * dist * dist;
  const Complex prefactor = std::exp(ikr) / (4.0 * kPi * k * k * dist * dist * dist);
  const Eigen::Vector3d u = r / dist;
  const Eigen::Matrix3cd iso = (kr2 + ikr - 1.0) * Eigen::Matrix3cd::Identity();
  const Eigen::Matrix3cd dyad = (3.0 - 3.0 * ikr - kr2) * (u * u.transpose()).cast<Complex>();
  return prefactor * (iso + dyad);
}

DipoleMatrices dipole_matrices(const AtomArrayParams& p) {
  if (p.n == 0) throw InvalidParameter("n must be at least 1");
  if (!(p.spacing > 0.0)) throw InvalidParameter("spacing must be positive");
  if (!(p.wavelength > 0.0)) throw InvalidParameter("wavelength must be positive");
  if (std::abs(p.dipole.norm() - 1.0) > 1e-12) throw InvalidParameter("dipole must be a unit vector");
  require_non_negative(p.gamma0, "gamma0");

  const double omega = 2.0 * kPi / p.wavelength;  // c = 1
  // mu0 = 1 and |p|^2 fixed so that the single-atom rate equals gamma0.
  const double p2 = 3.0 * kPi * p.gamma0 / (omega * omega * omega);
  const auto n = static_cast<Eigen::Index>(p.n);
  DipoleMatrices out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.gamma(i, i) = p.gamma0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Eigen::Vector3d r(static_cast<double>(i - j) * p.spacing * p.wavelength, 0.0, 0.0);
      const Eigen::Matrix3cd g = green_tensor(r, omega);
      const Eigen::Matrix3d re = g.real();
      const Eigen::Matrix3d im = g.imag();
      const Complex jr = p.dipole.adjoint() * re.cast<Complex>() * p.dipole;
      const Complex gi = p.dipole.adjoint() * im.cast<Complex>() * p.dipole;
      out.j(i, j) = -omega * omega * p2 * jr.real();
      out.gamma(i, j) = 2.0 * omega * omega * p2 * gi.real();
    }
  }
  return out;
}

ModelSpec build_atom_array(const AtomArrayParams& p) {
  require_finite(p.omega_z, "omega_z");
  require_finite(p.omega, "omega");
  const DipoleMatrices m = dipole_matrices(p);
  ModelSpec spec;
  spec.name = "atom_array";
  spec.layout.n_spins = p.n;
  ClassicalExpr h;
  for (std::uint32_t i = 0; i < p.n; ++i) {
    h += p.omega_z * sz(i) + p.omega * sx(i);
  }
  for (std::uint32_t i = 0; i < p.n; ++i) {
    for (std::uint32_t j = i + 1; j < p.n; ++j) {
      const double jij = m.j(i, j);
      if (jij != 0.0) h += jij * (s_plus(i) * s_minus(j) + s_plus(j) * s_minus(i));
    }
  }
  spec.hamiltonian = std::move(h);
  for (std::uint32_t i = 0; i < p.n; ++i) {
    spec.jumps.push_back(s_minus(i));
    spec.jump_labels.push_back(site_label("loss", i));
  }
  spec.gamma = m.gamma.cast<Complex>();
  factor_dissipation(spec.gamma);
  return spec;
}

double quantum_correction_estimate(double spin_size, double omega, double gamma_down) {
  if (!(spin_size > 0.0)) throw InvalidParameter("spin_size must be positive");
  if (!(gamma_down > 0.0)) throw InvalidParameter("gamma_down must be positive");
  if (omega < 0.0) throw InvalidParameter("omega must be non-negative");
  const double critical = gamma_down / 4.0;
  if (omega >= critical) {
    throw AboveCritical("omega = " + std::to_string(omega) + " is not below the critical drive " +
                        std::to_string(critical));
  }
  const double ratio = omega / critical;
  return std::sqrt(1.0 - ratio * ratio) / (2.0 * spin_size);
}

SamplerSpec central_spin_initial(const CentralSpinParams& p, SpinScheme scheme) {
  SystemLayout layout;
  layout.n_spins = p.n + 1;
  SamplerSpec out = SamplerSpec::uniform(layout, scheme, Eigen::Vector3d::UnitZ());
  out.spins[0].direction = -Eigen::Vector3d::UnitZ();
  return out;
}

}  // namespace twa
