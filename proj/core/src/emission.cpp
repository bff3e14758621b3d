#include "slotfill/emission.hpp"

namespace slotfill {

EmissionCounts::EmissionCounts(std::size_t num_slots, std::size_t num_terms, double delta_)
    : delta(delta_), counts(num_slots, num_terms) {}

Matrix EmissionCounts::posterior() const {
  const auto prior = DirichletPrior::symmetric(num_terms(), delta);
  Matrix psi(num_slots(), num_terms());
  for (std::size_t m = 0; m < num_slots(); ++m) {
    const auto row = posterior_mean(prior, counts.row(m));
    std::copy(row.begin(), row.end(), psi.row(m).begin());
  }
  return psi;
}

}  // namespace slotfill
