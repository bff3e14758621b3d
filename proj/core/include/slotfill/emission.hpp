#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"

namespace slotfill {

/// Word-emission side shared by every model: T(slot, term) counts with a
/// symmetric Dirichlet prior delta over the vocabulary. The collapsed weight of
/// term v under slot m is (delta + T(m, v)) / (|V| delta + T(m, *)).
struct EmissionCounts {
  double delta = 0.1;
  CountTable counts;  // slots x terms

  EmissionCounts() = default;
  EmissionCounts(std::size_t num_slots, std::size_t num_terms, double delta);

  std::size_t num_slots() const { return counts.rows(); }
  std::size_t num_terms() const { return counts.cols(); }

  double weight(SlotId m, TermId v) const {
    return (delta + static_cast<double>(counts.at(m, v))) /
           (delta * static_cast<double>(num_terms()) + static_cast<double>(counts.row_total(m)));
  }
  double log_weight(SlotId m, TermId v) const { return std::log(weight(m, v)); }

  /// psi: one posterior-mean row per slot.
  Matrix posterior() const;
};

/// log psi(m, v), with the out-of-vocabulary policy: an unknown term is
/// emitted only by the miscellaneous slot (log-probability 0 there, -inf
/// elsewhere).
inline double log_emission(const Matrix& psi, SlotId m, TermId v, SlotId misc) {
  if (v == kUnknownTerm || v >= psi.cols()) {
    return m == misc ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return std::log(psi(m, v));
}

}  // namespace slotfill
