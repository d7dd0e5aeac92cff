#include "twa/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "twa/errors.hpp"

namespace twa {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(t_final >= dt)) throw InvalidParameter("t_final must be at least dt");
  if (fixed_point_iters < 2) throw InvalidParameter("fixed_point_iters must be at least 2");
  if (!(fixed_point_tol >= 0.0)) throw InvalidParameter("fixed_point_tol must be non-negative");
  if (output_stride == 0) throw InvalidParameter("output_stride must be positive");
}

std::size_t IntegratorConfig::n_steps() const {
  // Round rather than truncate so t_final = k * dt is reached exactly.
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

std::vector<double> IntegratorConfig::output_times() const {
  std::vector<double> out;
  const std::size_t n = n_steps();
  for (std::size_t k = 0; k <= n; k += output_stride) out.push_back(static_cast<double>(k) * dt);
  return out;
}

NoiseMixer::NoiseMixer(const LangevinSystem& sys) : n_channels_(sys.n_channels) {
  const auto& g = sys.gamma;
  const auto n = static_cast<Eigen::Index>(n_channels_);
  for (Eigen::Index i = 0; i < n && diagonal_; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && g(i, j) != Complex(0.0)) {
        diagonal_ = false;
        break;
      }
    }
  }
  if (diagonal_) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double rate = g(i, i).real();
      if (rate > 0.0) {
        channels_.push_back(static_cast<std::size_t>(i));
        rates_.push_back(std::sqrt(rate));
      }
    }
    return;
  }
  const auto& f = sys.noise_factor;
  Eigen::Index rank = 0;
  while (rank < f.eigenvalues.size() && f.eigenvalues(rank) > 0.0) ++rank;
  real_ = f.factor.leftCols(rank).real();
  imag_ = f.factor.leftCols(rank).imag();
  rates_.assign(static_cast<std::size_t>(rank), 0.0);
}

void NoiseMixer::draw(Rng& rng, double dt, double* out) const {
  std::normal_distribution<double> gauss;
  draw(rng, gauss, dt, out);
}

void NoiseMixer::draw(Rng& rng, std::normal_distribution<double>& gauss, double dt,
                      double* out) const {
  const double scale = 1.0 / std::sqrt(dt);
  std::fill(out, out + components(), 0.0);
  if (diagonal_) {
    for (std::size_t j = 0; j < channels_.size(); ++j) {
      const double amp = rates_[j] * scale;
      const double x = gauss(rng);
      const double y = gauss(rng);
      out[2 * channels_[j]] = amp * x;
      out[2 * channels_[j] + 1] = amp * y;
    }
    return;
  }
  // xi = B zeta with zeta = eta_x - i eta_y:
  // xi^x = Re(B) eta_x + Im(B) eta_y, xi^y = Re(B) eta_y - Im(B) eta_x.
  const Eigen::Index rank = real_.cols();
  Eigen::VectorXd ex(rank), ey(rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    ex(j) = gauss(rng) * scale;
    ey(j) = gauss(rng) * scale;
  }
  const Eigen::VectorXd xx = real_ * ex + imag_ * ey;
  const Eigen::VectorXd xy = real_ * ey - imag_ * ex;
  for (std::size_t i = 0; i < n_channels_; ++i) {
    out[2 * i] = xx(static_cast<Eigen::Index>(i));
    out[2 * i + 1] = xy(static_cast<Eigen::Index>(i));
  }
}

Stepper::Stepper(const LangevinSystem& sys)
    : sys_(&sys),
      mixer_(sys),
      complex_(sys.layout.n_bosons > 0),
      n_spins_(sys.layout.n_spins),
      n_bosons_(sys.layout.n_bosons) {
  noise_offset_ = 3 * n_spins_ + 2 * n_bosons_;
  n_inputs_ = noise_offset_ + mixer_.components();
  for (std::size_t k = 0; k < n_spins_; ++k) spin_bound_.push_back(10.0 * 2.0 * sys.layout.spin_size(k));

  const auto slot = [this](Variable v) -> std::size_t {
    switch (v.kind) {
      case VariableKind::Spin:
        return 3 * v.index + static_cast<std::size_t>(v.axis);
      case VariableKind::Boson:
        return 3 * n_spins_ + v.index;
      default:
        return 3 * n_spins_ + n_bosons_ + v.index;
    }
  };
  const auto noise_slot = [this](NoiseComponent c) {
    return static_cast<std::uint32_t>(noise_offset_ + c.flat());
  };

  // Outputs: three field components per spin, then da/dt per mode.
  std::vector<std::vector<const SpinFieldCoupling*>> by_site(n_spins_);
  for (const auto& c : sys.spin_field_couplings) by_site[c.site].push_back(&c);

  auto build = [&](auto& set, auto convert) {
    for (std::size_t k = 0; k < n_spins_; ++k) {
      for (std::size_t b = 0; b < 3; ++b) {
        set.begin_output();
        set.append(sys.spin_field[k][b], slot, convert);
        for (const auto* c : by_site[k]) set.append(c->field[b], slot, convert, noise_slot(c->noise));
      }
    }
    for (std::size_t m = 0; m < n_bosons_; ++m) {
      const std::size_t idx = sys.index_of(Variable::boson(static_cast<std::uint32_t>(m)));
      set.begin_output();
      set.append(sys.drift[idx], slot, convert);
      for (const auto& c : sys.couplings) {
        if (c.variable == idx) set.append(c.expr, slot, convert, noise_slot(c.noise));
      }
    }
  };
  if (complex_) {
    build(complex_set_, [](Complex c) { return c; });
  } else {
    build(real_set_, [](Complex c) {
      if (c.imag() != 0.0) throw Error("internal: complex coefficient in a real spin field");
      return c.real();
    });
  }
}

std::size_t Stepper::compiled_terms() const noexcept {
  return complex_ ? complex_set_.terms() : real_set_.terms();
}

Stepper::Workspace Stepper::workspace() const {
  Workspace ws;
  if (complex_) {
    ws.complex_in.assign(n_inputs_, Complex(0.0));
    ws.complex_out.assign(complex_set_.outputs(), Complex(0.0));
  } else {
    ws.real_in.assign(n_inputs_, 0.0);
    ws.real_out.assign(real_set_.outputs(), 0.0);
  }
  ws.spins0.resize(n_spins_);
  ws.bosons0.resize(n_bosons_);
  ws.noise.assign(mixer_.components(), 0.0);
  return ws;
}

namespace {

inline double real_part(double x) { return x; }
inline double real_part(Complex x) { return x.real(); }

}  // namespace

template <typename Scalar>
void Stepper::solve(PhaseSpaceState& state, const double* noise, double dt,
                    const IntegratorConfig& config, const PolynomialSet<Scalar>& set,
                    std::vector<Scalar>& in, std::vector<Scalar>& out, Workspace& ws) const {
  for (std::size_t c = 0; c < mixer_.components(); ++c) in[noise_offset_ + c] = noise[c];
  std::copy(state.spins.begin(), state.spins.end(), ws.spins0.begin());
  std::copy(state.bosons.begin(), state.bosons.end(), ws.bosons0.begin());

  const double half_dt = 0.5 * dt;
  for (int sweep = 0; sweep < config.fixed_point_iters; ++sweep) {
    for (std::size_t k = 0; k < n_spins_; ++k) {
      const Eigen::Vector3d mid = 0.5 * (ws.spins0[k] + state.spins[k]);
      for (int a = 0; a < 3; ++a) in[3 * k + a] = mid(a);
    }
    if constexpr (std::is_same_v<Scalar, Complex>) {
      for (std::size_t m = 0; m < n_bosons_; ++m) {
        const Complex mid = 0.5 * (ws.bosons0[m] + state.bosons[m]);
        in[3 * n_spins_ + m] = mid;
        in[3 * n_spins_ + n_bosons_ + m] = std::conj(mid);
      }
    }
    set.evaluate(in.data(), out.data());

    double change = 0.0;
    for (std::size_t k = 0; k < n_spins_; ++k) {
      // s' = s + dt h x (s + s')/2 solved exactly for fixed h (Cayley map).
      const Eigen::Vector3d w(half_dt * real_part(out[3 * k]), half_dt * real_part(out[3 * k + 1]),
                              half_dt * real_part(out[3 * k + 2]));
      const Eigen::Vector3d& s0 = ws.spins0[k];
      const Eigen::Vector3d b = s0 + w.cross(s0);
      const Eigen::Vector3d next = (b + w.cross(b) + w.dot(b) * w) / (1.0 + w.squaredNorm());
      change = std::max(change, (next - state.spins[k]).cwiseAbs().maxCoeff());
      state.spins[k] = next;
    }
    if constexpr (std::is_same_v<Scalar, Complex>) {
      for (std::size_t m = 0; m < n_bosons_; ++m) {
        const Complex next = ws.bosons0[m] + dt * out[3 * n_spins_ + m];
        change = std::max(change, std::abs(next - state.bosons[m]));
        state.bosons[m] = next;
      }
    }
    // Sweep 0 is the predictor; convergence is judged between corrections.
    if (sweep > 0 && change < config.fixed_point_tol) break;
  }
}

bool Stepper::step(PhaseSpaceState& state, const double* noise, double dt,
                   const IntegratorConfig& config, Workspace& ws) const {
  if (complex_) {
    solve(state, noise, dt, config, complex_set_, ws.complex_in, ws.complex_out, ws);
  } else {
    solve(state, noise, dt, config, real_set_, ws.real_in, ws.real_out, ws);
  }
  for (std::size_t k = 0; k < n_spins_; ++k) {
    const auto& s = state.spins[k];
    if (!s.allFinite() || s.cwiseAbs().maxCoeff() > spin_bound_[k]) return false;
  }
  for (const auto& a : state.bosons) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  }
  return true;
}

void integrate_trajectory(PhaseSpaceState state, const Stepper& stepper,
                          const IntegratorConfig& config, Rng& rng, const SampleCallback& on_sample,
                          Stepper::Workspace& ws) {
  const std::size_t n = config.n_steps();
  std::size_t record = 0;
  std::normal_distribution<double> gauss;
  on_sample(record++, 0.0, state);
  for (std::size_t step = 1; step <= n; ++step) {
    stepper.mixer().draw(rng, gauss, config.dt, ws.noise.data());
    if (!stepper.step(state, ws.noise.data(), config.dt, config, ws)) {
      const double t = static_cast<double>(step) * config.dt;
      throw NonFiniteState("trajectory left the finite domain at t = " + std::to_string(t), t);
    }
    if (step % config.output_stride == 0) {
      on_sample(record++, static_cast<double>(step) * config.dt, state);
    }
  }
}

std::vector<PhaseSpaceState> integrate_trajectory(const PhaseSpaceState& initial,
                                                  const LangevinSystem& sys,
                                                  const IntegratorConfig& config, Rng& rng) {
  config.validate();
  Stepper stepper(sys);
  auto ws = stepper.workspace();
  std::vector<PhaseSpaceState> out;
  integrate_trajectory(
      initial, stepper, config, rng,
      [&out](std::size_t, double, const PhaseSpaceState& s) { out.push_back(s); }, ws);
  return out;
}

}  // namespace twa
