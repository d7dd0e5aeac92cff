#pragma once

// Compilation of a Lindbladian specification into classical Langevin
// equations with multiplicative white noise.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "twa/algebra.hpp"

namespace twa {

struct SystemLayout {
  std::size_t n_spins = 0;
  std::vector<double> spin_sizes;  // S per site; empty means all 1/2
  std::size_t n_bosons = 0;

  double spin_size(std::size_t site) const noexcept {
    return spin_sizes.empty() ? 0.5 : spin_sizes[site];
  }
  bool contains(Variable v) const noexcept {
    return v.is_spin() ? v.index < n_spins : v.index < n_bosons;
  }
};

/// Hamiltonian, jump variables and Hermitian PSD dissipation matrix of a
/// Lindbladian written in classical variables.
struct ModelSpec {
  std::string name;
  SystemLayout layout;
  ClassicalExpr hamiltonian;
  std::vector<ClassicalExpr> jumps;
  std::vector<std::string> jump_labels;  // optional, one per jump
  Eigen::MatrixXcd gamma;                // jumps.size() square
};

/// Throws UnknownVariable, InvalidParameter, NonHermitianGamma or
/// NegativeGammaEigenvalue.
void validate(const ModelSpec& spec);

/// Relative tolerance used for Hermiticity and eigenvalue clamping.
inline constexpr double kGammaTolerance = 1e-12;

struct DissipationFactor {
  Eigen::VectorXd eigenvalues;    // descending, clamped >= 0
  Eigen::MatrixXcd eigenvectors;  // column j belongs to eigenvalues[j]
  Eigen::MatrixXcd factor;        // B = V diag(sqrt(eigenvalues)), Gamma = B B^dagger
};

/// Eigen-factorization of a Hermitian PSD matrix. Eigenvalues with magnitude
/// below kGammaTolerance * max are clamped to zero.
DissipationFactor factor_dissipation(const Eigen::MatrixXcd& gamma);

enum class NoiseAxis : std::uint8_t { X = 0, Y = 1 };

/// One real component of the complex channel noise xi_i = xi_i^x - i xi_i^y.
struct NoiseComponent {
  std::size_t channel = 0;
  NoiseAxis axis = NoiseAxis::X;

  std::size_t flat() const noexcept { return 2 * channel + static_cast<std::size_t>(axis); }
  friend auto operator<=>(const NoiseComponent&, const NoiseComponent&) = default;
};

/// Continuum covariance of two real noise components per unit time:
/// Re(Gamma_ij) delta_ab plus an antisymmetric Im(Gamma_ij) part between x and y.
double noise_covariance(const Eigen::MatrixXcd& gamma, NoiseComponent a, NoiseComponent b);

struct NoiseCoupling {
  std::size_t variable = 0;  // index into LangevinSystem::variables
  NoiseComponent noise;
  ClassicalExpr expr;
};

/// Rotation generator of one spin driven by a single noise component.
struct SpinFieldCoupling {
  std::size_t site = 0;
  NoiseComponent noise;
  std::array<ClassicalExpr, 3> field;
};

struct LangevinSystem {
  SystemLayout layout;
  /// s^x, s^y, s^z of every site, then a_m of every mode.
  std::vector<Variable> variables;
  /// d(variable)/dt without noise, parallel to `variables`.
  std::vector<ClassicalExpr> drift;
  /// Coefficients multiplying the real noise components; sorted, sparse.
  std::vector<NoiseCoupling> couplings;
  std::size_t n_channels = 0;
  Eigen::MatrixXcd gamma;
  DissipationFactor noise_factor;

  /// For every spin, drift = spin_field x s, with the field expressed as
  /// 2 * grad of the effective Hamiltonian.
  std::vector<std::array<ClassicalExpr, 3>> spin_field;
  std::vector<SpinFieldCoupling> spin_field_couplings;

  std::size_t index_of(Variable v) const;
  /// Zero expression when the variable does not couple to the component.
  ClassicalExpr coupling(std::size_t variable, NoiseComponent noise) const;
};

/// Builds drift and noise couplings of every dynamical variable:
///   drift = {psi,H} - (i/2) sum_i {psi,Lbar_i} sum_j G_ij L_j
///                   - (i/2) sum_i sum_j conj(G_ij) Lbar_j {L_i,psi}
/// with the couplings -(i/2){psi,Lbar_i} to xi_i and -(i/2){L_i,psi} to
/// conj(xi_i). Brackets are taken before the self-consistent field is
/// inserted. Channels with zero rate carry no couplings.
LangevinSystem build_langevin(const ModelSpec& spec);

/// Sum_a s_k^a * rhs(s_k^a) for the drift (column 0) and for every noise
/// component touching site k (columns 1..). All entries vanish for a
/// correctly built system.
std::vector<ClassicalExpr> spin_length_residuals(const LangevinSystem& sys, std::size_t site);

/// Symbolic diffusion tensor D_vw = sum_ab g_va g_wb cov(a,b). Invariant
/// under orthogonal relabelling of the noise components.
ClassicalExpr diffusion(const LangevinSystem& sys, std::size_t v, std::size_t w);

/// 1e-3 divided by the fastest scale among Hamiltonian coefficients and
/// dissipation eigenvalues.
double default_time_step(const ModelSpec& spec);

/// JSON dump: variables, drift and coupling text, eigenvalues of Gamma.
std::string to_debug_json(const LangevinSystem& sys);

/// Human-readable equation listing, one line per variable.
std::string format_equations(const LangevinSystem& sys);

}  // namespace twa
