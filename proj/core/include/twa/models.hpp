#pragma once

// Builders for the supported spin and spin-boson models.

#include <Eigen/Dense>
#include <vector>

#include "twa/langevin.hpp"
#include "twa/sampling.hpp"

namespace twa {

/// H = Omega s^x with loss s^- and pump s^+.
struct DrivenSpinParams {
  double omega = 1.0;
  double gamma_down = 0.0;
  double gamma_up = 0.0;
  double spin_size = 0.5;
  bool rescale_decay = false;  // gamma_down -> gamma_down / 2S
};

/// Photon mode coupled to N two-level atoms.
struct TavisCummingsParams {
  std::size_t n = 1;
  double omega = 1.0;    // photon frequency
  double epsilon = 1.0;  // atomic splitting
  double g = 0.0;
  double kappa = 0.0;
  double gamma_down = 0.0;
  double gamma_up = 0.0;
};

/// Central spin (site 0) coupled to N satellites (sites 1..N).
struct CentralSpinParams {
  std::size_t n = 1;
  double omega = 1.0;
  double epsilon = 1.0;
  double g = 0.0;
  double kappa = 0.0;  // central loss
  double gamma_down = 0.0;
  double gamma_up = 0.0;
  // Optional per-satellite overrides of epsilon, g and gamma_down.
  std::vector<double> epsilons;
  std::vector<double> couplings;
  std::vector<double> losses;
};

/// Periodic Ising chain with transverse drive, dephasing and loss.
struct RydbergChainParams {
  std::size_t n = 2;
  double omega = 1.0;
  double j = 1.0;
  double kappa = 0.0;
  double gamma_down = 0.0;
};

/// Chain of dipoles along x coupled through the free-space field.
struct AtomArrayParams {
  std::size_t n = 2;
  double spacing = 0.1;     // in units of the wavelength
  double wavelength = 1.0;
  Eigen::Vector3cd dipole = Eigen::Vector3cd(0.0, 0.0, 1.0);  // unit vector
  double omega_z = 0.0;
  double omega = 0.0;  // Rabi drive
  double gamma0 = 1.0;
};

ModelSpec build_driven_spin(const DrivenSpinParams& p);
ModelSpec build_tavis_cummings(const TavisCummingsParams& p);
ModelSpec build_central_spin(const CentralSpinParams& p);
ModelSpec build_rydberg_chain(const RydbergChainParams& p);
ModelSpec build_atom_array(const AtomArrayParams& p);

/// Free-space dyadic Green's tensor with mu0 = c = 1, k = omega.
/// Throws ZeroDisplacement for r = 0.
Eigen::Matrix3cd green_tensor(const Eigen::Vector3d& r, double omega);

struct DipoleMatrices {
  Eigen::MatrixXd j;      // coherent exchange, zero diagonal
  Eigen::MatrixXd gamma;  // dissipation, gamma0 on the diagonal
};

/// J and Gamma of an atom array; positions are (i * spacing * wavelength, 0, 0).
DipoleMatrices dipole_matrices(const AtomArrayParams& p);

/// First-order noise correction to the steady variance of sigma^x of a large
/// driven spin with rescaled decay. Throws AboveCritical for omega >= gamma/4.
double quantum_correction_estimate(double spin_size, double omega, double gamma_down);

/// Central spin down, satellites up.
SamplerSpec central_spin_initial(const CentralSpinParams& p, SpinScheme scheme);

}  // namespace twa
