#pragma once

// Commutative polynomial algebra over classical phase-space variables.
//
// Spin components s_k^x, s_k^y, s_k^z are real; a boson amplitude a_m and its
// conjugate abar_m are treated as independent symbols. Expressions are kept in
// a canonical form (sorted factors, sorted and merged terms, no exact zeros),
// so equality of two expressions is structural equality.

#include <compare>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace twa {

using Complex = std::complex<double>;

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

char axis_name(Axis axis) noexcept;
/// Parses 'x', 'y' or 'z' (either case); throws InvalidParameter otherwise.
Axis parse_axis(char c);

/// Levi-Civita symbol with epsilon_xyz = +1.
int levi_civita(Axis a, Axis b, Axis c) noexcept;

enum class VariableKind : std::uint8_t { Spin = 0, Boson = 1, BosonConj = 2 };

struct Variable {
  VariableKind kind = VariableKind::Spin;
  std::uint32_t index = 0;  // site for spins, mode for bosons
  Axis axis = Axis::X;      // unused (X) for bosons

  static constexpr Variable spin(std::uint32_t site, Axis axis) noexcept {
    return {VariableKind::Spin, site, axis};
  }
  static constexpr Variable boson(std::uint32_t mode) noexcept {
    return {VariableKind::Boson, mode, Axis::X};
  }
  static constexpr Variable boson_conj(std::uint32_t mode) noexcept {
    return {VariableKind::BosonConj, mode, Axis::X};
  }

  constexpr bool is_spin() const noexcept { return kind == VariableKind::Spin; }
  constexpr bool is_boson() const noexcept { return !is_spin(); }

  /// Complex conjugate symbol: spins map to themselves, a <-> abar.
  constexpr Variable conjugate() const noexcept {
    switch (kind) {
      case VariableKind::Boson:
        return boson_conj(index);
      case VariableKind::BosonConj:
        return boson(index);
      default:
        return *this;
    }
  }

  friend constexpr auto operator<=>(const Variable&, const Variable&) = default;
};

/// "sx[3]", "a[0]", "abar[0]".
std::string to_string(const Variable& v);

struct Monomial {
  Complex coefficient;
  std::vector<Variable> factors;  // sorted ascending, repeats allowed

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

class ClassicalExpr {
 public:
  ClassicalExpr() = default;
  ClassicalExpr(double constant);   // NOLINT(google-explicit-constructor)
  ClassicalExpr(Complex constant);  // NOLINT(google-explicit-constructor)
  explicit ClassicalExpr(Variable v);
  /// Sorts factors, merges equal factor multisets and drops exact zeros.
  explicit ClassicalExpr(std::vector<Monomial> terms);

  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }
  /// Highest total degree; 0 for constants and for the zero expression.
  int degree() const noexcept;

  /// Re-runs canonicalization. Identity on every constructed expression.
  ClassicalExpr normalized() const;

  ClassicalExpr& operator+=(const ClassicalExpr& rhs);
  ClassicalExpr& operator-=(const ClassicalExpr& rhs);
  ClassicalExpr& operator*=(const ClassicalExpr& rhs);
  ClassicalExpr& operator*=(Complex scale);

  friend ClassicalExpr operator+(ClassicalExpr a, const ClassicalExpr& b) { return a += b; }
  friend ClassicalExpr operator-(ClassicalExpr a, const ClassicalExpr& b) { return a -= b; }
  friend ClassicalExpr operator*(const ClassicalExpr& a, const ClassicalExpr& b);
  friend ClassicalExpr operator*(Complex s, ClassicalExpr e) { return e *= s; }
  friend ClassicalExpr operator*(double s, ClassicalExpr e) { return e *= Complex(s); }
  friend ClassicalExpr operator*(ClassicalExpr e, Complex s) { return e *= s; }
  friend ClassicalExpr operator*(ClassicalExpr e, double s) { return e *= Complex(s); }
  friend ClassicalExpr operator-(ClassicalExpr e) { return e *= Complex(-1.0); }

  friend bool operator==(const ClassicalExpr&, const ClassicalExpr&) = default;

 private:
  std::vector<Monomial> terms_;  // sorted by factors
};

ClassicalExpr add(const ClassicalExpr& a, const ClassicalExpr& b);
ClassicalExpr multiply(const ClassicalExpr& a, const ClassicalExpr& b);

/// Conjugates coefficients and swaps a <-> abar; spins are unchanged.
ClassicalExpr conjugate(const ClassicalExpr& e);

/// Formal partial derivative with every symbol independent.
ClassicalExpr differentiate(const ClassicalExpr& e, Variable v);

/// Bracket of two symbols: {s^a_k, s^b_k} = 2 eps_abc s^c_k, {a_m, abar_m} = -i.
ClassicalExpr elementary_bracket(Variable u, Variable v);

/// Poisson bracket built from the elementary brackets by bilinearity and
/// the Leibniz rule.
ClassicalExpr poisson_bracket(const ClassicalExpr& a, const ClassicalExpr& b);

/// Replaces every occurrence of `v` by `replacement`.
ClassicalExpr substitute(const ClassicalExpr& e, Variable v, const ClassicalExpr& replacement);

/// Zeroes real or imaginary coefficient parts with magnitude <= tol.
ClassicalExpr chop(const ClassicalExpr& e, double tol);

/// Coefficientwise comparison with absolute tolerance.
bool approx_equal(const ClassicalExpr& a, const ClassicalExpr& b, double tol = 1e-12);

/// True when the expression equals its conjugate within tol.
bool is_real_valued(const ClassicalExpr& e, double tol = 1e-12);

double max_abs_coefficient(const ClassicalExpr& e) noexcept;

/// Distinct symbols appearing in the expression, sorted.
std::vector<Variable> variables(const ClassicalExpr& e);

/// Deterministic canonical rendering, e.g. "0.5*sx[0]*sz[0] + -2*sz[0]".
std::string to_string(const ClassicalExpr& e);

/// Evaluates with `lookup(Variable) -> Complex`.
template <typename Lookup>
Complex evaluate(const ClassicalExpr& e, Lookup&& lookup) {
  Complex total = 0.0;
  for (const auto& m : e.terms()) {
    Complex value = m.coefficient;
    for (const auto& f : m.factors) value *= lookup(f);
    total += value;
  }
  return total;
}

// Shorthands for the symbols of site k / mode m.
inline ClassicalExpr s(std::uint32_t k, Axis axis) { return ClassicalExpr(Variable::spin(k, axis)); }
inline ClassicalExpr sx(std::uint32_t k) { return s(k, Axis::X); }
inline ClassicalExpr sy(std::uint32_t k) { return s(k, Axis::Y); }
inline ClassicalExpr sz(std::uint32_t k) { return s(k, Axis::Z); }
/// s^+ = (s^x + i s^y) / 2, the classical image of sigma^+.
ClassicalExpr s_plus(std::uint32_t k);
/// s^- = (s^x - i s^y) / 2.
ClassicalExpr s_minus(std::uint32_t k);
inline ClassicalExpr amp(std::uint32_t m) { return ClassicalExpr(Variable::boson(m)); }
inline ClassicalExpr amp_conj(std::uint32_t m) { return ClassicalExpr(Variable::boson_conj(m)); }

}  // namespace twa
