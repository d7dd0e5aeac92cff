#pragma once

// Exact density-matrix integration of the Lindblad equation for small systems.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "twa/langevin.hpp"
#include "twa/observables.hpp"
#include "twa/sampling.hpp"
#include "twa/series.hpp"

namespace twa {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Spin-1/2 sites (basis 0 = up, 1 = down) followed by truncated boson modes.
/// Site 0 is the most significant tensor factor.
struct HilbertLayout {
  static constexpr std::size_t kMaxDimension = 16384;

  std::size_t n_spins = 0;
  std::vector<std::size_t> cutoffs;  // n_max per boson mode

  static HilbertLayout for_model(const SystemLayout& layout, std::size_t cutoff);
  std::size_t dimension() const;
  /// Throws InvalidParameter for spins beyond 1/2, a missing cutoff or D > cap.
  void validate(const SystemLayout& model) const;
};

/// How products of symbols on one site or mode become operators.
enum class LiftOrdering {
  Strict,       // at most one factor per site and mode
  Hamiltonian,  // one factor per spin site, symmetrized boson products
  Symmetric,    // symmetrized everywhere (Weyl ordering)
};

/// Operator image of a classical expression; s^a -> sigma^a, a -> annihilator,
/// abar -> creator. Throws OrderingAmbiguity when the ordering forbids a
/// monomial.
SparseMatrix lift(const ClassicalExpr& e, const HilbertLayout& layout, LiftOrdering ordering);

struct OperatorSet {
  SparseMatrix hamiltonian;
  std::vector<SparseMatrix> jumps;
  Eigen::MatrixXcd gamma;
};

OperatorSet build_operators(const ModelSpec& spec, const HilbertLayout& layout);

/// Pure product state pointing along each spin's direction, coherent states
/// for the modes. Adds a CutoffTooSmall warning when the coherent weight
/// above n_max - 2 exceeds 1e-6.
Eigen::MatrixXcd product_state(const SamplerSpec& sampler, const HilbertLayout& layout,
                               std::vector<std::string>* warnings = nullptr);

struct OracleConfig {
  double dt = 0.0;  // maximum RK4 step; 0 picks 1 / (Liouvillian norm bound)
  double trace_tolerance = 1e-6;
};

struct OracleObservable {
  std::string name;
  SparseMatrix op;
  double correction = 0.0;
};

/// Symmetric lift of each observable plus its ordering correction.
std::vector<OracleObservable> lift_observables(const std::vector<ObservableSpec>& observables,
                                               const ModelSpec& spec, const HilbertLayout& layout);

struct OracleResult {
  ObservableSeries series;
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;  // of the final state
  double step = 0.0;            // RK4 step actually used
  std::vector<std::string> warnings;
  Eigen::MatrixXcd final_state;
};

/// Right-hand side of the master equation.
class Liouvillian {
 public:
  explicit Liouvillian(const OperatorSet& ops);

  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
  /// Upper bound on the spectral radius used for the default step.
  double norm_bound() const noexcept { return norm_bound_; }

 private:
  SparseMatrix effective_;  // H - (i/2) sum_i P_i^dagger L_i
  std::vector<SparseMatrix> jumps_;
  std::vector<SparseMatrix> fields_;  // P_i = sum_j Gamma_ij L_j
  double norm_bound_ = 0.0;
};

/// Fourth-order Runge-Kutta on a uniform output grid starting at times[0].
/// Throws TraceDrift if |Tr rho - 1| exceeds the tolerance.
OracleResult evolve(const Eigen::MatrixXcd& rho0, const OperatorSet& ops,
                    const std::vector<double>& times,
                    const std::vector<OracleObservable>& observables, const OracleConfig& config);

/// build_operators + product_state + lift_observables + evolve.
OracleResult run_oracle(const ModelSpec& spec, const SamplerSpec& sampler,
                        const HilbertLayout& layout, const std::vector<double>& times,
                        const std::vector<ObservableSpec>& observables, const OracleConfig& config);

/// Re Tr(op rho).
double expectation(const SparseMatrix& op, const Eigen::MatrixXcd& rho);

}  // namespace twa
