#pragma once

// Observables as classical phase-space functions plus an ordering correction.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "twa/algebra.hpp"
#include "twa/langevin.hpp"
#include "twa/sampling.hpp"

namespace twa {

enum class ObservableKind {
  SpinExpectation,
  SymmetricTwoPoint,
  PhotonNumber,
  CentralPopulation,
  EmissionRate,
  MeanExcitation,
  MeanSpin,
  CustomExpr,
};

struct ObservableSpec {
  ObservableKind kind = ObservableKind::SpinExpectation;
  std::size_t site = 0;
  Axis axis = Axis::Z;
  std::size_t site2 = 0;
  Axis axis2 = Axis::Z;
  std::size_t mode = 0;
  std::string label;        // CustomExpr only
  ClassicalExpr expr;       // CustomExpr only
  double correction = 0.0;  // CustomExpr only

  static ObservableSpec spin(std::size_t site, Axis axis);
  static ObservableSpec two_point(std::size_t site1, Axis axis1, std::size_t site2, Axis axis2);
  static ObservableSpec photon_number(std::size_t mode = 0);
  static ObservableSpec central_population();
  static ObservableSpec emission_rate();
  static ObservableSpec mean_excitation();
  static ObservableSpec mean_spin(Axis axis);
  static ObservableSpec custom(std::string label, ClassicalExpr expr, double correction = 0.0);

  /// Column label used in CSV output, e.g. "sz[0]" or "n_photon[0]".
  std::string name() const;
  /// Throws InvalidParameter when referenced sites or modes do not exist.
  void validate(const ModelSpec& spec) const;
};

/// Phase-space function f and constant c such that the estimate is mean(f) + c.
/// The emission rate uses the model's Gamma and its mean diagonal as Gamma0.
struct ClassicalObservable {
  ClassicalExpr expr;
  double correction = 0.0;
};

ClassicalObservable to_classical(const ObservableSpec& obs, const ModelSpec& spec);

/// (1 / N Gamma0) [sum_ij Gamma_ij mean(s_i^+ s_j^-) + Gamma0/2 sum_i mean(s_i^z)].
double emission_rate(const std::vector<PhaseSpaceState>& states, const Eigen::MatrixXcd& gamma,
                     double gamma0);

}  // namespace twa
