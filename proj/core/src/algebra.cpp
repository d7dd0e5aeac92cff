#include "twa/algebra.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>

#include "twa/errors.hpp"

namespace twa {

namespace {

using FactorMap = std::map<std::vector<Variable>, Complex>;

void accumulate(FactorMap& acc, std::vector<Variable> factors, Complex c) {
  if (c == Complex(0.0)) return;
  auto [it, inserted] = acc.try_emplace(std::move(factors), c);
  if (!inserted) it->second += c;
}

std::vector<Monomial> flatten(FactorMap&& acc) {
  std::vector<Monomial> out;
  out.reserve(acc.size());
  for (auto& [factors, c] : acc) {
    if (c == Complex(0.0)) continue;
    out.push_back({c, factors});
  }
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

std::string format_coefficient(Complex c) {
  if (c.imag() == 0.0) return format_double(c.real());
  if (c.real() == 0.0) return format_double(c.imag()) + "i";
  std::string im = format_double(c.imag());
  if (im.front() != '-') im = "+" + im;
  return "(" + format_double(c.real()) + im + "i)";
}

}  // namespace

char axis_name(Axis axis) noexcept {
  switch (axis) {
    case Axis::X:
      return 'x';
    case Axis::Y:
      return 'y';
    default:
      return 'z';
  }
}

Axis parse_axis(char c) {
  switch (c) {
    case 'x':
    case 'X':
      return Axis::X;
    case 'y':
    case 'Y':
      return Axis::Y;
    case 'z':
    case 'Z':
      return Axis::Z;
    default:
      throw InvalidParameter(std::string("unknown spin axis '") + c + "'");
  }
}

int levi_civita(Axis a, Axis b, Axis c) noexcept {
  const int i = static_cast<int>(a), j = static_cast<int>(b), k = static_cast<int>(c);
  if (i == j || j == k || i == k) return 0;
  // Even permutations of (0,1,2) are cyclic shifts.
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

std::string to_string(const Variable& v) {
  switch (v.kind) {
    case VariableKind::Spin:
      return std::string("s") + axis_name(v.axis) + "[" + std::to_string(v.index) + "]";
    case VariableKind::Boson:
      return "a[" + std::to_string(v.index) + "]";
    default:
      return "abar[" + std::to_string(v.index) + "]";
  }
}

ClassicalExpr::ClassicalExpr(double constant) : ClassicalExpr(Complex(constant)) {}

ClassicalExpr::ClassicalExpr(Complex constant) {
  if (constant != Complex(0.0)) terms_.push_back({constant, {}});
}

ClassicalExpr::ClassicalExpr(Variable v) { terms_.push_back({Complex(1.0), {v}}); }

ClassicalExpr::ClassicalExpr(std::vector<Monomial> terms) {
  FactorMap acc;
  for (auto& m : terms) {
    std::sort(m.factors.begin(), m.factors.end());
    accumulate(acc, std::move(m.factors), m.coefficient);
  }
  terms_ = flatten(std::move(acc));
}

int ClassicalExpr::degree() const noexcept {
  std::size_t d = 0;
  for (const auto& m : terms_) d = std::max(d, m.factors.size());
  return static_cast<int>(d);
}

ClassicalExpr ClassicalExpr::normalized() const { return ClassicalExpr(terms_); }

ClassicalExpr& ClassicalExpr::operator+=(const ClassicalExpr& rhs) {
  // Both sides are sorted: merge without a map.
  std::vector<Monomial> out;
  out.reserve(terms_.size() + rhs.terms_.size());
  auto i = terms_.begin();
  auto j = rhs.terms_.begin();
  while (i != terms_.end() || j != rhs.terms_.end()) {
    if (j == rhs.terms_.end() || (i != terms_.end() && i->factors < j->factors)) {
      out.push_back(std::move(*i++));
    } else if (i == terms_.end() || j->factors < i->factors) {
      out.push_back(*j++);
    } else {
      Complex c = i->coefficient + j->coefficient;
      if (c != Complex(0.0)) out.push_back({c, std::move(i->factors)});
      ++i;
      ++j;
    }
  }
  terms_ = std::move(out);
  return *this;
}

ClassicalExpr& ClassicalExpr::operator-=(const ClassicalExpr& rhs) { return *this += -rhs; }

ClassicalExpr& ClassicalExpr::operator*=(const ClassicalExpr& rhs) {
  *this = *this * rhs;
  return *this;
}

ClassicalExpr& ClassicalExpr::operator*=(Complex scale) {
  if (scale == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  std::vector<Monomial> out;
  out.reserve(terms_.size());
  for (auto& m : terms_) {
    Complex c = m.coefficient * scale;
    if (c != Complex(0.0)) out.push_back({c, std::move(m.factors)});
  }
  terms_ = std::move(out);
  return *this;
}

ClassicalExpr operator*(const ClassicalExpr& a, const ClassicalExpr& b) {
  FactorMap acc;
  std::vector<Variable> merged;
  for (const auto& ma : a.terms_) {
    for (const auto& mb : b.terms_) {
      merged.resize(ma.factors.size() + mb.factors.size());
      std::merge(ma.factors.begin(), ma.factors.end(), mb.factors.begin(), mb.factors.end(),
                 merged.begin());
      accumulate(acc, merged, ma.coefficient * mb.coefficient);
    }
  }
  ClassicalExpr out;
  out.terms_ = flatten(std::move(acc));
  return out;
}

ClassicalExpr add(const ClassicalExpr& a, const ClassicalExpr& b) { return a + b; }
ClassicalExpr multiply(const ClassicalExpr& a, const ClassicalExpr& b) { return a * b; }

ClassicalExpr conjugate(const ClassicalExpr& e) {
  std::vector<Monomial> terms;
  terms.reserve(e.size());
  for (const auto& m : e.terms()) {
    Monomial c{std::conj(m.coefficient), m.factors};
    for (auto& f : c.factors) f = f.conjugate();
    terms.push_back(std::move(c));
  }
  return ClassicalExpr(std::move(terms));
}

ClassicalExpr differentiate(const ClassicalExpr& e, Variable v) {
  std::vector<Monomial> terms;
  for (const auto& m : e.terms()) {
    auto first = std::lower_bound(m.factors.begin(), m.factors.end(), v);
    if (first == m.factors.end() || *first != v) continue;
    auto last = std::upper_bound(first, m.factors.end(), v);
    const auto power = static_cast<double>(last - first);
    Monomial d{m.coefficient * power, {}};
    d.factors.reserve(m.factors.size() - 1);
    d.factors.insert(d.factors.end(), m.factors.begin(), first);
    d.factors.insert(d.factors.end(), first + 1, m.factors.end());
    terms.push_back(std::move(d));
  }
  return ClassicalExpr(std::move(terms));
}

ClassicalExpr elementary_bracket(Variable u, Variable v) {
  if (u.index != v.index) return {};
  if (u.is_spin() && v.is_spin()) {
    for (Axis c : {Axis::X, Axis::Y, Axis::Z}) {
      const int eps = levi_civita(u.axis, v.axis, c);
      if (eps != 0) return 2.0 * eps * s(u.index, c);
    }
    return {};
  }
  if (u.kind == VariableKind::Boson && v.kind == VariableKind::BosonConj) return Complex(0.0, -1.0);
  if (u.kind == VariableKind::BosonConj && v.kind == VariableKind::Boson) return Complex(0.0, 1.0);
  return {};
}

ClassicalExpr poisson_bracket(const ClassicalExpr& a, const ClassicalExpr& b) {
  const auto va = variables(a);
  const auto vb = variables(b);
  std::map<Variable, ClassicalExpr> db;
  ClassicalExpr out;
  for (const auto& u : va) {
    ClassicalExpr da;
    bool have_da = false;
    for (const auto& v : vb) {
      ClassicalExpr uv = elementary_bracket(u, v);
      if (uv.is_zero()) continue;
      if (!have_da) {
        da = differentiate(a, u);
        have_da = true;
      }
      auto it = db.find(v);
      if (it == db.end()) it = db.emplace(v, differentiate(b, v)).first;
      out += da * it->second * uv;
    }
  }
  return out;
}

ClassicalExpr substitute(const ClassicalExpr& e, Variable v, const ClassicalExpr& replacement) {
  ClassicalExpr out;
  for (const auto& m : e.terms()) {
    ClassicalExpr term(m.coefficient);
    std::vector<Monomial> rest{{Complex(1.0), {}}};
    for (const auto& f : m.factors) {
      if (f == v) {
        term *= replacement;
      } else {
        rest.front().factors.push_back(f);
      }
    }
    out += term * ClassicalExpr(std::move(rest));
  }
  return out;
}

ClassicalExpr chop(const ClassicalExpr& e, double tol) {
  std::vector<Monomial> terms;
  for (const auto& m : e.terms()) {
    double re = std::abs(m.coefficient.real()) <= tol ? 0.0 : m.coefficient.real();
    double im = std::abs(m.coefficient.imag()) <= tol ? 0.0 : m.coefficient.imag();
    terms.push_back({Complex(re, im), m.factors});
  }
  return ClassicalExpr(std::move(terms));
}

bool approx_equal(const ClassicalExpr& a, const ClassicalExpr& b, double tol) {
  const ClassicalExpr diff = a - b;
  return std::all_of(diff.terms().begin(), diff.terms().end(),
                     [tol](const Monomial& m) { return std::abs(m.coefficient) <= tol; });
}

bool is_real_valued(const ClassicalExpr& e, double tol) { return approx_equal(e, conjugate(e), tol); }

double max_abs_coefficient(const ClassicalExpr& e) noexcept {
  double m = 0.0;
  for (const auto& t : e.terms()) m = std::max(m, std::abs(t.coefficient));
  return m;
}

std::vector<Variable> variables(const ClassicalExpr& e) {
  std::vector<Variable> out;
  for (const auto& m : e.terms()) out.insert(out.end(), m.factors.begin(), m.factors.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(const ClassicalExpr& e) {
  if (e.is_zero()) return "0";
  std::string out;
  for (const auto& m : e.terms()) {
    if (!out.empty()) out += " + ";
    const bool unit = m.coefficient == Complex(1.0);
    const bool minus_unit = m.coefficient == Complex(-1.0);
    if (m.factors.empty()) {
      out += format_coefficient(m.coefficient);
      continue;
    }
    if (minus_unit) {
      out += "-";
    } else if (!unit) {
      out += format_coefficient(m.coefficient) + "*";
    }
    for (std::size_t i = 0; i < m.factors.size();) {
      std::size_t j = i;
      while (j < m.factors.size() && m.factors[j] == m.factors[i]) ++j;
      if (i > 0) out += "*";
      out += to_string(m.factors[i]);
      if (j - i > 1) out += "^" + std::to_string(j - i);
      i = j;
    }
  }
  return out;
}

ClassicalExpr s_plus(std::uint32_t k) { return 0.5 * sx(k) + Complex(0.0, 0.5) * sy(k); }
ClassicalExpr s_minus(std::uint32_t k) { return 0.5 * sx(k) - Complex(0.0, 0.5) * sy(k); }

}  // namespace twa
