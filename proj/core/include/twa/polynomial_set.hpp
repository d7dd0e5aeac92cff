#pragma once

// Flat, cache-friendly evaluation of many polynomials over one input vector.

#include <cstdint>
#include <limits>
#include <vector>

#include "twa/algebra.hpp"

namespace twa {

template <typename Scalar>
class PolynomialSet {
 public:
  static constexpr std::uint32_t kNoFactor = std::numeric_limits<std::uint32_t>::max();

  /// Starts a new output polynomial (initially zero).
  void begin_output() {
    if (term_offset_.empty()) term_offset_.push_back(0);
    term_offset_.push_back(term_offset_.back());
  }

  /// Appends `scale * e * input[extra]` (extra omitted when kNoFactor) to
  /// the current output. `slot(Variable)` maps symbols to input positions.
  template <typename SlotFn, typename Convert>
  void append(const ClassicalExpr& e, SlotFn&& slot, Convert&& convert,
              std::uint32_t extra = kNoFactor) {
    if (factor_offset_.empty()) factor_offset_.push_back(0);
    for (const auto& m : e.terms()) {
      coefficients_.push_back(convert(m.coefficient));
      for (const auto& f : m.factors) factors_.push_back(static_cast<std::uint32_t>(slot(f)));
      if (extra != kNoFactor) factors_.push_back(extra);
      factor_offset_.push_back(static_cast<std::uint32_t>(factors_.size()));
      ++term_offset_.back();
    }
  }

  std::size_t outputs() const noexcept { return term_offset_.empty() ? 0 : term_offset_.size() - 1; }
  std::size_t terms() const noexcept { return coefficients_.size(); }

  void evaluate(const Scalar* input, Scalar* out) const noexcept {
    const std::size_t n = outputs();
    const std::uint32_t* fo = factor_offset_.data();
    const std::uint32_t* fs = factors_.data();
    const Scalar* c = coefficients_.data();
    for (std::size_t o = 0; o < n; ++o) {
      Scalar acc{};
      for (std::uint32_t t = term_offset_[o]; t < term_offset_[o + 1]; ++t) {
        Scalar v = c[t];
        for (std::uint32_t f = fo[t]; f < fo[t + 1]; ++f) v *= input[fs[f]];
        acc += v;
      }
      out[o] = acc;
    }
  }

 private:
  std::vector<std::uint32_t> term_offset_;    // per output, into terms
  std::vector<Scalar> coefficients_;          // per term
  std::vector<std::uint32_t> factor_offset_;  // per term, into factors_
  std::vector<std::uint32_t> factors_;
};

}  // namespace twa
