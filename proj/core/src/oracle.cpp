#include "twa/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "twa/errors.hpp"

namespace twa {

namespace {

using Dense = Eigen::MatrixXcd;

SparseMatrix sparse_identity(std::size_t n) {
  SparseMatrix id(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  id.setIdentity();
  return id;
}

Dense pauli(Axis axis) {
  Dense m = Dense::Zero(2, 2);
  switch (axis) {
    case Axis::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case Axis::Y:
      m(0, 1) = Complex(0.0, -1.0);
      m(1, 0) = Complex(0.0, 1.0);
      break;
    case Axis::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

Dense annihilator(std::size_t cutoff) {
  const auto d = static_cast<Eigen::Index>(cutoff + 1);
  Dense a = Dense::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Average of the products over every distinct ordering of `factors`.
Dense symmetrized_product(std::vector<Variable> factors, const std::function<Dense(Variable)>& op,
                          Eigen::Index dim) {
  std::sort(factors.begin(), factors.end());
  Dense sum = Dense::Zero(dim, dim);
  std::size_t count = 0;
  do {
    Dense prod = Dense::Identity(dim, dim);
    for (const auto& f : factors) prod = prod * op(f);
    sum += prod;
    ++count;
  } while (std::next_permutation(factors.begin(), factors.end()));
  return sum / static_cast<double>(count);
}

double one_norm(const SparseMatrix& m) {
  Eigen::VectorXd cols = Eigen::VectorXd::Zero(m.cols());
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) cols(it.col()) += std::abs(it.value());
  }
  return m.cols() > 0 ? cols.maxCoeff() : 0.0;
}

double inf_norm(const SparseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

double spectral_bound(const SparseMatrix& m) { return std::sqrt(one_norm(m) * inf_norm(m)); }

}  // namespace

HilbertLayout HilbertLayout::for_model(const SystemLayout& layout, std::size_t cutoff) {
  HilbertLayout out;
  out.n_spins = layout.n_spins;
  out.cutoffs.assign(layout.n_bosons, cutoff);
  return out;
}

std::size_t HilbertLayout::dimension() const {
  std::size_t d = 1;
  for (std::size_t k = 0; k < n_spins; ++k) {
    d *= 2;
    if (d > kMaxDimension) return d;
  }
  for (auto c : cutoffs) {
    d *= c + 1;
    if (d > kMaxDimension) return d;
  }
  return d;
}

void HilbertLayout::validate(const SystemLayout& model) const {
  if (model.n_spins != n_spins) throw InvalidParameter("oracle layout spin count differs from the model");
  for (std::size_t k = 0; k < model.n_spins; ++k) {
    if (model.spin_size(k) != 0.5) throw InvalidParameter("the exact solver supports spin 1/2 only");
  }
  if (cutoffs.size() != model.n_bosons) throw InvalidParameter("one cutoff per boson mode is required");
  for (auto c : cutoffs) {
    if (c == 0) throw InvalidParameter("boson cutoff must be at least 1");
  }
  if (dimension() > kMaxDimension) {
    throw InvalidParameter("Hilbert space dimension exceeds " + std::to_string(kMaxDimension));
  }
}

SparseMatrix lift(const ClassicalExpr& e, const HilbertLayout& layout, LiftOrdering ordering) {
  const std::size_t n_slots = layout.n_spins + layout.cutoffs.size();
  std::vector<std::size_t> dims(n_slots);
  for (std::size_t k = 0; k < n_slots; ++k) {
    dims[k] = k < layout.n_spins ? 2 : layout.cutoffs[k - layout.n_spins] + 1;
  }
  std::vector<Dense> creators, annihilators;
  for (auto c : layout.cutoffs) {
    annihilators.push_back(annihilator(c));
    creators.push_back(annihilators.back().adjoint());
  }
  const auto local_op = [&](Variable v) -> Dense {
    switch (v.kind) {
      case VariableKind::Spin:
        return pauli(v.axis);
      case VariableKind::Boson:
        return annihilators[v.index];
      default:
        return creators[v.index];
    }
  };

  const auto dim = static_cast<Eigen::Index>(layout.dimension());
  SparseMatrix total(dim, dim);
  for (const auto& m : e.terms()) {
    std::map<std::size_t, std::vector<Variable>> by_slot;
    for (const auto& f : m.factors) {
      if (f.is_spin() ? f.index >= layout.n_spins : f.index >= layout.cutoffs.size()) {
        throw UnknownVariable(to_string(f) + " is outside the oracle layout");
      }
      by_slot[f.is_spin() ? f.index : layout.n_spins + f.index].push_back(f);
    }
    SparseMatrix term = sparse_identity(1);
    for (std::size_t k = 0; k < n_slots; ++k) {
      auto it = by_slot.find(k);
      SparseMatrix local;
      if (it == by_slot.end()) {
        local = sparse_identity(dims[k]);
      } else {
        const auto& fs = it->second;
        const bool spin = k < layout.n_spins;
        const bool allow_many = ordering == LiftOrdering::Symmetric ||
                                (ordering == LiftOrdering::Hamiltonian && !spin);
        if (fs.size() > 1 && !allow_many) {
          throw OrderingAmbiguity("monomial " + to_string(ClassicalExpr(std::vector<Monomial>{m})) +
                                  " has several factors on one site or mode");
        }
        local = symmetrized_product(fs, local_op, static_cast<Eigen::Index>(dims[k])).sparseView();
      }
      SparseMatrix next = Eigen::kroneckerProduct(term, local);
      term = std::move(next);
    }
    total += m.coefficient * term;
  }
  total.prune(Complex(0.0), 0.0);
  return total;
}

OperatorSet build_operators(const ModelSpec& spec, const HilbertLayout& layout) {
  validate(spec);
  layout.validate(spec.layout);
  OperatorSet ops;
  ops.hamiltonian = lift(spec.hamiltonian, layout, LiftOrdering::Hamiltonian);
  const SparseMatrix adj = ops.hamiltonian.adjoint();
  const double herm = spectral_bound(ops.hamiltonian - adj);
  if (herm > 1e-10 * std::max(1.0, spectral_bound(ops.hamiltonian))) {
    throw InvalidParameter("lifted Hamiltonian is not Hermitian");
  }
  for (const auto& j : spec.jumps) ops.jumps.push_back(lift(j, layout, LiftOrdering::Strict));
  ops.gamma = spec.gamma;
  return ops;
}

Eigen::MatrixXcd product_state(const SamplerSpec& sampler, const HilbertLayout& layout,
                               std::vector<std::string>* warnings) {
  if (sampler.spins.size() != layout.n_spins || sampler.bosons.size() != layout.cutoffs.size()) {
    throw InvalidParameter("sampler does not match the oracle layout");
  }
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (const auto& sp : sampler.spins) {
    if (sp.spin_size != 0.5) throw InvalidParameter("the exact solver supports spin 1/2 only");
    const Eigen::Vector3d& n = sp.direction;
    const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
    const double phi = std::atan2(n.y(), n.x());
    Eigen::VectorXcd local(2);
    local << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
    Eigen::VectorXcd next = Eigen::kroneckerProduct(psi, local);
    psi = std::move(next);
  }
  for (std::size_t m = 0; m < layout.cutoffs.size(); ++m) {
    const std::size_t cutoff = layout.cutoffs[m];
    const Complex alpha = sampler.bosons[m];
    Eigen::VectorXcd local(static_cast<Eigen::Index>(cutoff + 1));
    Complex c = std::exp(-0.5 * std::norm(alpha));
    double kept = 0.0;
    for (std::size_t n = 0; n <= cutoff; ++n) {
      if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
      local(static_cast<Eigen::Index>(n)) = c;
      if (n + 2 <= cutoff) kept += std::norm(c);
    }
    if (1.0 - kept > 1e-6 && warnings != nullptr) {
      warnings->push_back("CutoffTooSmall: mode " + std::to_string(m) + " has weight " +
                          std::to_string(1.0 - kept) + " above n_max - 2");
    }
    local.normalize();
    Eigen::VectorXcd next = Eigen::kroneckerProduct(psi, local);
    psi = std::move(next);
  }
  return psi * psi.adjoint();
}

std::vector<OracleObservable> lift_observables(const std::vector<ObservableSpec>& observables,
                                               const ModelSpec& spec, const HilbertLayout& layout) {
  std::vector<OracleObservable> out;
  for (const auto& obs : observables) {
    const ClassicalObservable c = to_classical(obs, spec);
    out.push_back({obs.name(), lift(c.expr, layout, LiftOrdering::Symmetric), c.correction});
  }
  return out;
}

Liouvillian::Liouvillian(const OperatorSet& ops) : jumps_(ops.jumps) {
  const std::size_t n = ops.jumps.size();
  const auto dim = ops.hamiltonian.rows();
  SparseMatrix anti(dim, dim);
  double dissipative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    SparseMatrix field(dim, dim);
    for (std::size_t j = 0; j < n; ++j) {
      const Complex g = ops.gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (g != Complex(0.0)) field += g * ops.jumps[j];
    }
    const SparseMatrix adj = field.adjoint();
    anti += SparseMatrix(adj * ops.jumps[i]);
    dissipative += spectral_bound(ops.jumps[i]) * spectral_bound(field);
    fields_.push_back(std::move(field));
  }
  effective_ = ops.hamiltonian - Complex(0.0, 0.5) * anti;
  effective_.prune(Complex(0.0), 0.0);
  norm_bound_ = 2.0 * spectral_bound(effective_) + dissipative;
}

void Liouvillian::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  // -i (H_eff rho - rho H_eff^dagger) = X + X^dagger with X = -i H_eff rho.
  const Dense x = Complex(0.0, -1.0) * (effective_ * rho);
  out = x + x.adjoint();
  // rho P^dagger = (P rho^dagger)^dagger keeps every product sparse-times-dense.
  const Dense rho_adj = rho.adjoint();
  Dense right;
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    right.noalias() = fields_[i] * rho_adj;
    out.noalias() += jumps_[i] * right.adjoint();
  }
}

double expectation(const SparseMatrix& op, const Eigen::MatrixXcd& rho) {
  Complex sum = 0.0;
  for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(op, r); it; ++it) sum += it.value() * rho(it.col(), it.row());
  }
  return sum.real();
}

OracleResult evolve(const Eigen::MatrixXcd& rho0, const OperatorSet& ops,
                    const std::vector<double>& times,
                    const std::vector<OracleObservable>& observables, const OracleConfig& config) {
  if (times.empty()) throw InvalidParameter("time grid is empty");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidParameter("time grid must be increasing");
  }
  const Liouvillian liouvillian(ops);
  const double max_step =
      config.dt > 0.0 ? config.dt : (liouvillian.norm_bound() > 0.0 ? 1.0 / liouvillian.norm_bound() : 1.0);

  OracleResult result;
  auto& series = result.series;
  series.times = times;
  for (const auto& o : observables) series.names.push_back(o.name);
  const auto n_obs = static_cast<Eigen::Index>(observables.size());
  const auto n_t = static_cast<Eigen::Index>(times.size());
  series.mean.resize(n_obs, n_t);
  series.std_error = Eigen::MatrixXd::Zero(n_obs, n_t);
  series.n_total = 1;

  Dense rho = rho0;
  Dense k1, k2, k3, k4, stage;
  const auto record = [&](Eigen::Index t) {
    const double drift = std::abs(rho.trace() - Complex(1.0));
    result.max_trace_drift = std::max(result.max_trace_drift, drift);
    if (drift > config.trace_tolerance) {
      throw TraceDrift("trace drifted by " + std::to_string(drift) + " at t = " +
                       std::to_string(times[static_cast<std::size_t>(t)]));
    }
    for (Eigen::Index o = 0; o < n_obs; ++o) {
      const auto& obs = observables[static_cast<std::size_t>(o)];
      series.mean(o, t) = expectation(obs.op, rho) + obs.correction;
    }
  };
  record(0);
  for (Eigen::Index t = 1; t < n_t; ++t) {
    const double span = times[static_cast<std::size_t>(t)] - times[static_cast<std::size_t>(t - 1)];
    const auto substeps = static_cast<std::size_t>(std::ceil(span / max_step - 1e-9));
    const double h = span / static_cast<double>(std::max<std::size_t>(substeps, 1));
    result.step = h;
    for (std::size_t s = 0; s < std::max<std::size_t>(substeps, 1); ++s) {
      liouvillian.apply(rho, k1);
      stage = rho + (0.5 * h) * k1;
      liouvillian.apply(stage, k2);
      stage = rho + (0.5 * h) * k2;
      liouvillian.apply(stage, k3);
      stage = rho + h * k3;
      liouvillian.apply(stage, k4);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      // apply() assumes a Hermitian argument; an anti-Hermitian rounding residue would grow.
      stage = rho.adjoint();
      result.max_hermiticity_error = std::max(result.max_hermiticity_error, (rho - stage).cwiseAbs().maxCoeff());
      rho = 0.5 * (rho + stage);
    }
    record(t);
  }
  if (rho.rows() <= 2048) {
    const Dense herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Dense> solver(herm, Eigen::EigenvaluesOnly);
    result.min_eigenvalue = solver.eigenvalues().minCoeff();
  }
  result.final_state = std::move(rho);
  return result;
}

OracleResult run_oracle(const ModelSpec& spec, const SamplerSpec& sampler,
                        const HilbertLayout& layout, const std::vector<double>& times,
                        const std::vector<ObservableSpec>& observables, const OracleConfig& config) {
  const OperatorSet ops = build_operators(spec, layout);
  std::vector<std::string> warnings;
  const Dense rho0 = product_state(sampler, layout, &warnings);
  const auto lifted = lift_observables(observables, spec, layout);
  OracleResult result = evolve(rho0, ops, times, lifted, config);

  // Population near the cutoff at the final time.
  std::size_t stride = 1;
  for (std::size_t m = layout.cutoffs.size(); m-- > 0;) {
    const std::size_t levels = layout.cutoffs[m] + 1;
    double weight = 0.0;
    for (Eigen::Index i = 0; i < result.final_state.rows(); ++i) {
      const std::size_t n = (static_cast<std::size_t>(i) / stride) % levels;
      if (n + 1 >= layout.cutoffs[m]) weight += result.final_state(i, i).real();
    }
    if (weight > 1e-6) {
      warnings.push_back("CutoffTooSmall: mode " + std::to_string(m) + " holds weight " +
                         std::to_string(weight) + " within one level of the cutoff at the final time");
    }
    stride *= levels;
  }
  result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
  return result;
}

}  // namespace twa
