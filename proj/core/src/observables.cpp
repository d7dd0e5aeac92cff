#include "twa/observables.hpp"

#include "twa/errors.hpp"

namespace twa {

ObservableSpec ObservableSpec::spin(std::size_t site, Axis axis) {
  ObservableSpec o;
  o.kind = ObservableKind::SpinExpectation;
  o.site = site;
  o.axis = axis;
  return o;
}

ObservableSpec ObservableSpec::two_point(std::size_t site1, Axis axis1, std::size_t site2, Axis axis2) {
  ObservableSpec o;
  o.kind = ObservableKind::SymmetricTwoPoint;
  o.site = site1;
  o.axis = axis1;
  o.site2 = site2;
  o.axis2 = axis2;
  return o;
}

ObservableSpec ObservableSpec::photon_number(std::size_t mode) {
  ObservableSpec o;
  o.kind = ObservableKind::PhotonNumber;
  o.mode = mode;
  return o;
}

ObservableSpec ObservableSpec::central_population() {
  ObservableSpec o;
  o.kind = ObservableKind::CentralPopulation;
  return o;
}

ObservableSpec ObservableSpec::emission_rate() {
  ObservableSpec o;
  o.kind = ObservableKind::EmissionRate;
  return o;
}

ObservableSpec ObservableSpec::mean_excitation() {
  ObservableSpec o;
  o.kind = ObservableKind::MeanExcitation;
  return o;
}

ObservableSpec ObservableSpec::mean_spin(Axis axis) {
  ObservableSpec o;
  o.kind = ObservableKind::MeanSpin;
  o.axis = axis;
  return o;
}

ObservableSpec ObservableSpec::custom(std::string label, ClassicalExpr expr, double correction) {
  ObservableSpec o;
  o.kind = ObservableKind::CustomExpr;
  o.label = std::move(label);
  o.expr = std::move(expr);
  o.correction = correction;
  return o;
}

std::string ObservableSpec::name() const {
  const auto spin_name = [](std::size_t k, Axis a) {
    return std::string("s") + axis_name(a) + "[" + std::to_string(k) + "]";
  };
  switch (kind) {
    case ObservableKind::SpinExpectation:
      return spin_name(site, axis);
    case ObservableKind::SymmetricTwoPoint:
      return spin_name(site, axis) + "*" + spin_name(site2, axis2);
    case ObservableKind::PhotonNumber:
      return "n_photon[" + std::to_string(mode) + "]";
    case ObservableKind::CentralPopulation:
      return "central_population";
    case ObservableKind::EmissionRate:
      return "emission_rate";
    case ObservableKind::MeanExcitation:
      return "mean_excitation";
    case ObservableKind::MeanSpin:
      return std::string("mean_s") + axis_name(axis);
    default:
      return label;
  }
}

void ObservableSpec::validate(const ModelSpec& spec) const {
  const auto& layout = spec.layout;
  const auto need_site = [&](std::size_t k) {
    if (k >= layout.n_spins) {
      throw InvalidParameter("observable " + name() + " references spin " + std::to_string(k) +
                             " but the model has " + std::to_string(layout.n_spins));
    }
  };
  switch (kind) {
    case ObservableKind::SpinExpectation:
      need_site(site);
      break;
    case ObservableKind::SymmetricTwoPoint:
      need_site(site);
      need_site(site2);
      break;
    case ObservableKind::PhotonNumber:
      if (mode >= layout.n_bosons) {
        throw InvalidParameter("observable " + name() + " references a missing boson mode");
      }
      break;
    case ObservableKind::CentralPopulation:
      need_site(0);
      break;
    case ObservableKind::EmissionRate:
      if (layout.n_spins == 0 || spec.jumps.empty()) {
        throw InvalidParameter("emission_rate needs a model with spins and decay channels");
      }
      if (static_cast<std::size_t>(spec.gamma.rows()) != layout.n_spins) {
        throw InvalidParameter("emission_rate needs one decay channel per spin");
      }
      break;
    case ObservableKind::MeanExcitation:
    case ObservableKind::MeanSpin:
      need_site(0);
      break;
    case ObservableKind::CustomExpr:
      if (label.empty()) throw InvalidParameter("custom observable needs a name");
      for (const auto& v : variables(expr)) {
        if (!layout.contains(v)) throw UnknownVariable("observable " + label + " references " + to_string(v));
      }
      break;
  }
}

ClassicalObservable to_classical(const ObservableSpec& obs, const ModelSpec& spec) {
  obs.validate(spec);
  const auto n = static_cast<double>(spec.layout.n_spins);
  const auto site = [](std::size_t k) { return static_cast<std::uint32_t>(k); };
  switch (obs.kind) {
    case ObservableKind::SpinExpectation:
      return {s(site(obs.site), obs.axis), 0.0};
    case ObservableKind::SymmetricTwoPoint:
      return {s(site(obs.site), obs.axis) * s(site(obs.site2), obs.axis2), 0.0};
    case ObservableKind::PhotonNumber: {
      const auto m = static_cast<std::uint32_t>(obs.mode);
      return {amp_conj(m) * amp(m), -0.5};
    }
    case ObservableKind::CentralPopulation:
      return {0.5 * (1.0 + sz(0)), 0.0};
    case ObservableKind::MeanExcitation: {
      ClassicalExpr e;
      for (std::uint32_t k = 0; k < spec.layout.n_spins; ++k) e += sz(k);
      return {0.5 + (0.5 / n) * e, 0.0};
    }
    case ObservableKind::MeanSpin: {
      ClassicalExpr e;
      for (std::uint32_t k = 0; k < spec.layout.n_spins; ++k) e += s(k, obs.axis);
      return {(1.0 / n) * e, 0.0};
    }
    case ObservableKind::EmissionRate: {
      const auto& g = spec.gamma;
      const double gamma0 = g.diagonal().real().mean();
      if (!(gamma0 > 0.0)) throw InvalidParameter("emission_rate needs a positive decay rate");
      ClassicalExpr e;
      for (std::uint32_t i = 0; i < spec.layout.n_spins; ++i) {
        for (std::uint32_t j = 0; j < spec.layout.n_spins; ++j) {
          const Complex gij = g(i, j);
          if (gij != Complex(0.0)) e += gij * (s_plus(i) * s_minus(j));
        }
        e += 0.5 * gamma0 * sz(i);
      }
      e = chop(0.5 * (e + conjugate(e)), 1e-15 * std::max(1.0, max_abs_coefficient(e)));
      return {(1.0 / (n * gamma0)) * e, 0.0};
    }
    case ObservableKind::CustomExpr:
      return {obs.expr, obs.correction};
  }
  return {};
}

double emission_rate(const std::vector<PhaseSpaceState>& states, const Eigen::MatrixXcd& gamma,
                     double gamma0) {
  if (states.empty()) return 0.0;
  const std::size_t n = states.front().spins.size();
  if (static_cast<std::size_t>(gamma.rows()) != n) throw InvalidParameter("gamma does not match the spin count");
  double total = 0.0;
  Eigen::VectorXcd minus(static_cast<Eigen::Index>(n));
  for (const auto& st : states) {
    double sz_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      minus(static_cast<Eigen::Index>(k)) = 0.5 * Complex(st.spins[k].x(), -st.spins[k].y());
      sz_sum += st.spins[k].z();
    }
    // s_i^+ = conj(s_i^-), so sum_ij Gamma_ij s_i^+ s_j^- = minus^dagger Gamma minus.
    const Complex coherent = minus.dot(gamma * minus);
    total += coherent.real() + 0.5 * gamma0 * sz_sum;
  }
  return total / (static_cast<double>(states.size()) * static_cast<double>(n) * gamma0);
}

}  // namespace twa
