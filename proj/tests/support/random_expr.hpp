#pragma once

#include <random>

#include <twa/algebra.hpp>

namespace twa::testing {

/// Random polynomial over `sites` spins and `modes` boson modes with small
/// dyadic coefficients, so sums and products stay exact in floating point.
inline ClassicalExpr random_expr(std::mt19937_64& rng, std::uint32_t sites, std::uint32_t modes,
                                 int max_terms = 4, int max_degree = 3) {
  std::uniform_int_distribution<int> n_terms(1, max_terms);
  std::uniform_int_distribution<int> degree(0, max_degree);
  std::uniform_int_distribution<int> numer(-8, 8);
  const std::uint32_t n_symbols = 3 * sites + 2 * modes;
  std::uniform_int_distribution<std::uint32_t> symbol(0, n_symbols - 1);
  ClassicalExpr out;
  for (int t = n_terms(rng); t > 0; --t) {
    ClassicalExpr term(Complex(numer(rng) / 4.0, numer(rng) / 4.0));
    for (int d = degree(rng); d > 0; --d) {
      const std::uint32_t k = symbol(rng);
      if (k < 3 * sites) {
        term *= ClassicalExpr(Variable::spin(k / 3, static_cast<Axis>(k % 3)));
      } else if ((k - 3 * sites) % 2 == 0) {
        term *= amp((k - 3 * sites) / 2);
      } else {
        term *= amp_conj((k - 3 * sites) / 2);
      }
    }
    out += term;
  }
  return out;
}

}  // namespace twa::testing
