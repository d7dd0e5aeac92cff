#include "twa/langevin.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "twa/errors.hpp"

namespace twa {

namespace {

constexpr Complex kI{0.0, 1.0};

std::size_t slot_of(const Variable& v, const SystemLayout& layout) {
  return v.is_spin() ? v.index : layout.n_spins + v.index;
}

void check_variables(const ClassicalExpr& e, const SystemLayout& layout, const std::string& where) {
  for (const auto& v : variables(e)) {
    if (!layout.contains(v)) {
      throw UnknownVariable(where + " references " + to_string(v) + " outside the declared layout");
    }
  }
}

/// Terms of `e` grouped by every slot (site or mode) they touch.
std::vector<ClassicalExpr> partition_by_slot(const ClassicalExpr& e, const SystemLayout& layout) {
  const std::size_t n_slots = layout.n_spins + layout.n_bosons;
  std::vector<std::vector<Monomial>> parts(n_slots);
  for (const auto& m : e.terms()) {
    std::set<std::size_t> slots;
    for (const auto& f : m.factors) slots.insert(slot_of(f, layout));
    for (auto s : slots) parts[s].push_back(m);
  }
  std::vector<ClassicalExpr> out;
  out.reserve(n_slots);
  for (auto& p : parts) out.emplace_back(std::move(p));
  return out;
}

/// Projects onto the real-valued part, (e + conj e) / 2, after checking that
/// the discarded part is round-off.
ClassicalExpr real_valued(const ClassicalExpr& e, const std::string& what) {
  const ClassicalExpr c = conjugate(e);
  const double scale = std::max(1.0, max_abs_coefficient(e));
  if (!approx_equal(e, c, 1e-9 * scale)) {
    throw Error("internal: " + what + " is not real-valued: " + to_string(e));
  }
  return chop(0.5 * (e + c), 1e-15 * scale);
}

ClassicalExpr tidy(const ClassicalExpr& e) {
  return chop(e, 1e-15 * std::max(1.0, max_abs_coefficient(e)));
}

std::string noise_label(NoiseComponent n) {
  return "xi[" + std::to_string(n.channel) + "]." + (n.axis == NoiseAxis::X ? "x" : "y");
}

}  // namespace

void validate(const ModelSpec& spec) {
  const auto& layout = spec.layout;
  if (!layout.spin_sizes.empty() && layout.spin_sizes.size() != layout.n_spins) {
    throw InvalidParameter("spin_sizes must have one entry per spin");
  }
  for (double S : layout.spin_sizes) {
    const double twice = 2.0 * S;
    if (S <= 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
      throw InvalidParameter("spin size must be a positive half-integer, got " + std::to_string(S));
    }
  }
  check_variables(spec.hamiltonian, layout, "hamiltonian");
  for (std::size_t i = 0; i < spec.jumps.size(); ++i) {
    check_variables(spec.jumps[i], layout, "jump " + std::to_string(i));
  }
  const double hscale = std::max(1.0, max_abs_coefficient(spec.hamiltonian));
  if (!approx_equal(spec.hamiltonian, conjugate(spec.hamiltonian), 1e-12 * hscale)) {
    throw InvalidParameter("hamiltonian is not real-valued");
  }
  const auto n = static_cast<Eigen::Index>(spec.jumps.size());
  if (spec.gamma.rows() != n || spec.gamma.cols() != n) {
    throw InvalidParameter("gamma must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!spec.jump_labels.empty() && spec.jump_labels.size() != spec.jumps.size()) {
    throw InvalidParameter("jump_labels must have one entry per jump");
  }
  factor_dissipation(spec.gamma);
}

DissipationFactor factor_dissipation(const Eigen::MatrixXcd& gamma) {
  if (gamma.rows() != gamma.cols()) throw NonHermitianGamma("gamma is not square");
  DissipationFactor out;
  const Eigen::Index n = gamma.rows();
  if (n == 0) {
    out.eigenvalues.resize(0);
    out.eigenvectors.resize(0, 0);
    out.factor.resize(0, 0);
    return out;
  }
  const double scale = gamma.cwiseAbs().maxCoeff();
  const double asym = (gamma - gamma.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kGammaTolerance * std::max(1.0, scale)) {
    throw NonHermitianGamma("gamma is not Hermitian (max |G - G^dagger| = " + std::to_string(asym) +
                            ")");
  }
  const Eigen::MatrixXcd herm = 0.5 * (gamma + gamma.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
  if (solver.info() != Eigen::Success) throw Error("eigen-decomposition of gamma failed");

  // Eigen returns ascending order; flip to descending.
  const Eigen::VectorXd ascending = solver.eigenvalues();
  const double max_eig = std::max(std::abs(ascending(n - 1)), std::abs(ascending(0)));
  const double floor = kGammaTolerance * max_eig;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double lambda = ascending(n - 1 - j);
    if (lambda < -floor) {
      throw NegativeGammaEigenvalue("gamma has eigenvalue " + std::to_string(lambda) +
                                    " below the tolerance floor");
    }
    if (std::abs(lambda) <= floor) lambda = 0.0;
    out.eigenvalues(j) = lambda;
    out.eigenvectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  out.factor = out.eigenvectors * out.eigenvalues.cwiseSqrt().cast<Complex>().asDiagonal();
  return out;
}

double noise_covariance(const Eigen::MatrixXcd& gamma, NoiseComponent a, NoiseComponent b) {
  const Complex g = gamma(static_cast<Eigen::Index>(a.channel), static_cast<Eigen::Index>(b.channel));
  if (a.axis == b.axis) return g.real();
  // <xi_i^x xi_j^y> = Im G_ij and <xi_i^y xi_j^x> = -Im G_ij.
  return a.axis == NoiseAxis::X ? g.imag() : -g.imag();
}

std::size_t LangevinSystem::index_of(Variable v) const {
  auto it = std::find(variables.begin(), variables.end(), v);
  if (it == variables.end()) throw UnknownVariable(to_string(v) + " is not a dynamical variable");
  return static_cast<std::size_t>(it - variables.begin());
}

ClassicalExpr LangevinSystem::coupling(std::size_t variable, NoiseComponent noise) const {
  for (const auto& c : couplings) {
    if (c.variable == variable && c.noise == noise) return c.expr;
  }
  return {};
}

LangevinSystem build_langevin(const ModelSpec& spec) {
  validate(spec);
  const auto& layout = spec.layout;
  LangevinSystem sys;
  sys.layout = layout;
  sys.n_channels = spec.jumps.size();
  sys.gamma = spec.gamma;
  sys.noise_factor = factor_dissipation(spec.gamma);

  for (std::uint32_t k = 0; k < layout.n_spins; ++k) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) sys.variables.push_back(Variable::spin(k, a));
  }
  for (std::uint32_t m = 0; m < layout.n_bosons; ++m) sys.variables.push_back(Variable::boson(m));

  const std::size_t n_slots = layout.n_spins + layout.n_bosons;
  const auto h_parts = partition_by_slot(spec.hamiltonian, layout);

  // Jumps acting on each slot, with the self-consistent field pieces
  // P_i = sum_j G_ij L_j and its conjugate.
  const std::size_t n_jumps = spec.jumps.size();
  std::vector<std::vector<std::size_t>> jumps_on_slot(n_slots);
  std::vector<ClassicalExpr> jump_conj(n_jumps), field(n_jumps), field_conj(n_jumps);
  std::vector<bool> active(n_jumps, false);
  for (std::size_t i = 0; i < n_jumps; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    active[i] = spec.gamma(ii, ii).real() > 0.0;
    if (!active[i]) continue;
    jump_conj[i] = conjugate(spec.jumps[i]);
    for (std::size_t j = 0; j < n_jumps; ++j) {
      const Complex g = spec.gamma(ii, static_cast<Eigen::Index>(j));
      if (g != Complex(0.0)) field[i] += g * spec.jumps[j];
    }
    field_conj[i] = conjugate(field[i]);
    std::set<std::size_t> slots;
    for (const auto& v : variables(spec.jumps[i])) slots.insert(slot_of(v, layout));
    for (auto s : slots) jumps_on_slot[s].push_back(i);
  }

  for (std::size_t idx = 0; idx < sys.variables.size(); ++idx) {
    const Variable var = sys.variables[idx];
    const ClassicalExpr psi(var);
    const std::size_t slot = slot_of(var, layout);
    ClassicalExpr drift = poisson_bracket(psi, h_parts[slot]);
    for (std::size_t i : jumps_on_slot[slot]) {
      const ClassicalExpr with_conj = poisson_bracket(psi, jump_conj[i]);  // {psi, Lbar_i}
      const ClassicalExpr with_jump = poisson_bracket(spec.jumps[i], psi);  // {L_i, psi}
      drift += -0.5 * kI * (with_conj * field[i]) - 0.5 * kI * (field_conj[i] * with_jump);

      // xi_i = xi^x - i xi^y, conj(xi_i) = xi^x + i xi^y.
      const ClassicalExpr c = -0.5 * kI * with_conj;
      const ClassicalExpr d = -0.5 * kI * with_jump;
      ClassicalExpr gx = c + d;
      ClassicalExpr gy = -kI * c + kI * d;
      if (var.is_spin()) {
        gx = real_valued(gx, "noise coupling of " + to_string(var));
        gy = real_valued(gy, "noise coupling of " + to_string(var));
      } else {
        gx = tidy(gx);
        gy = tidy(gy);
      }
      if (!gx.is_zero()) sys.couplings.push_back({idx, {i, NoiseAxis::X}, std::move(gx)});
      if (!gy.is_zero()) sys.couplings.push_back({idx, {i, NoiseAxis::Y}, std::move(gy)});
    }
    sys.drift.push_back(var.is_spin() ? real_valued(drift, "drift of " + to_string(var))
                                      : tidy(drift));
  }
  std::sort(sys.couplings.begin(), sys.couplings.end(), [](const auto& a, const auto& b) {
    return std::tie(a.variable, a.noise) < std::tie(b.variable, b.noise);
  });

  // Rotation generators: drift(s_k) = field_k x s_k with
  // field_k = 2 grad_k H - i sum_i grad_k(Lbar_i) P_i + i sum_i conj(P_i) grad_k(L_i).
  sys.spin_field.resize(layout.n_spins);
  for (std::uint32_t k = 0; k < layout.n_spins; ++k) {
    std::map<NoiseComponent, std::array<ClassicalExpr, 3>> noise_fields;
    for (Axis beta : {Axis::X, Axis::Y, Axis::Z}) {
      const Variable v = Variable::spin(k, beta);
      const auto b = static_cast<std::size_t>(beta);
      ClassicalExpr h = 2.0 * differentiate(h_parts[k], v);
      for (std::size_t i : jumps_on_slot[k]) {
        const ClassicalExpr d_conj = differentiate(jump_conj[i], v);
        const ClassicalExpr d_jump = differentiate(spec.jumps[i], v);
        h += -kI * (d_conj * field[i]) + kI * (field_conj[i] * d_jump);
        noise_fields[{i, NoiseAxis::X}][b] = -kI * d_conj + kI * d_jump;
        noise_fields[{i, NoiseAxis::Y}][b] = -1.0 * d_conj - d_jump;
      }
      sys.spin_field[k][b] = real_valued(h, "spin field of site " + std::to_string(k));
    }
    for (auto& [noise, f] : noise_fields) {
      SpinFieldCoupling sc{k, noise, {}};
      bool any = false;
      for (std::size_t b = 0; b < 3; ++b) {
        sc.field[b] = real_valued(f[b], "noise field of site " + std::to_string(k));
        any = any || !sc.field[b].is_zero();
      }
      if (any) sys.spin_field_couplings.push_back(std::move(sc));
    }
  }
  return sys;
}

std::vector<ClassicalExpr> spin_length_residuals(const LangevinSystem& sys, std::size_t site) {
  const auto k = static_cast<std::uint32_t>(site);
  std::vector<ClassicalExpr> out;
  ClassicalExpr drift_part;
  std::map<NoiseComponent, ClassicalExpr> noise_parts;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const std::size_t idx = sys.index_of(Variable::spin(k, a));
    drift_part += s(k, a) * sys.drift[idx];
    for (const auto& c : sys.couplings) {
      if (c.variable == idx) noise_parts[c.noise] += s(k, a) * c.expr;
    }
  }
  out.push_back(drift_part);
  for (auto& [n, e] : noise_parts) out.push_back(e);
  return out;
}

ClassicalExpr diffusion(const LangevinSystem& sys, std::size_t v, std::size_t w) {
  ClassicalExpr out;
  for (const auto& a : sys.couplings) {
    if (a.variable != v) continue;
    for (const auto& b : sys.couplings) {
      if (b.variable != w) continue;
      const double cov = noise_covariance(sys.gamma, a.noise, b.noise);
      if (cov != 0.0) out += cov * (a.expr * b.expr);
    }
  }
  return out;
}

double default_time_step(const ModelSpec& spec) {
  double fastest = max_abs_coefficient(spec.hamiltonian);
  if (spec.gamma.size() > 0) {
    fastest = std::max(fastest, factor_dissipation(spec.gamma).eigenvalues(0));
  }
  return fastest > 0.0 ? 1e-3 / fastest : 1e-3;
}

std::string to_debug_json(const LangevinSystem& sys) {
  nlohmann::ordered_json j;
  j["n_spins"] = sys.layout.n_spins;
  j["n_bosons"] = sys.layout.n_bosons;
  j["n_channels"] = sys.n_channels;
  auto& vars = j["variables"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sys.variables.size(); ++i) {
    nlohmann::ordered_json v;
    v["name"] = to_string(sys.variables[i]);
    v["drift"] = to_string(sys.drift[i]);
    auto& cs = v["couplings"] = nlohmann::ordered_json::object();
    for (const auto& c : sys.couplings) {
      if (c.variable == i) cs[noise_label(c.noise)] = to_string(c.expr);
    }
    vars.push_back(std::move(v));
  }
  auto& eig = j["gamma_eigenvalues"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < sys.noise_factor.eigenvalues.size(); ++i) {
    eig.push_back(sys.noise_factor.eigenvalues(i));
  }
  return j.dump(2);
}

std::string format_equations(const LangevinSystem& sys) {
  std::ostringstream os;
  for (std::size_t i = 0; i < sys.variables.size(); ++i) {
    os << "d/dt " << to_string(sys.variables[i]) << " = " << to_string(sys.drift[i]) << "\n";
    for (const auto& c : sys.couplings) {
      if (c.variable == i) os << "    + [" << to_string(c.expr) << "] * " << noise_label(c.noise) << "\n";
    }
  }
  if (sys.n_channels > 0) {
    os << "noise: <xi[i].a xi[j].b> = Gamma_ij delta_ab delta(t-t'), xi[i] = xi[i].x - i xi[i].y\n";
  }
  return os.str();
}

}  // namespace twa
