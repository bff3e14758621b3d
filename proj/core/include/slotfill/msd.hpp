#pragma once

#include <cstddef>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"
#include "slotfill/emission.hpp"
#include "slotfill/usd.hpp"

namespace slotfill {

/// Markovian Slot Distribution.
///
/// Transition rows are indexed by predecessor slot, with one extra START row
/// (index num_slots) for the first word; there is no terminal factor.
/// upsilon is not collapsed: it is re-estimated from the transition counts by
/// posterior mean once per sweep and held fixed within a sweep.
struct MsdState {
  UsdState tagging;
  double zeta = 10000.0;
  CountTable transitions;  // (M + 1) x M
  Matrix upsilon;          // (M + 1) x M
};

struct MsdModel {
  EmissionCounts emission;
  double zeta;
  CountTable transitions;
  Matrix psi;
  Matrix upsilon;

  MsdModel(EmissionCounts counts, double zeta, CountTable transitions);
};

inline std::size_t start_row(const Matrix& upsilon) { return upsilon.rows() - 1; }

/// Posterior-mean transition rows from counts under a symmetric zeta prior.
Matrix transition_posterior(const CountTable& transitions, double zeta);

/// (M + 1) x M matrix with every row uniform.
Matrix uniform_transitions(std::size_t num_slots);

MsdState msd_init(const Corpus& corpus, double delta, double zeta, RandomSource& rng);

/// Normalized conditional over the record's candidate set for word i of record
/// q: upsilon(prev, m) * upsilon(m, next) * P2(m, v), with the successor factor
/// omitted at the last word and prev = START at the first. Word counts must
/// already exclude word i.
std::vector<double> msd_conditional(const MsdState& state, const Corpus& corpus, std::size_t q,
                                    std::size_t i);

/// One sweep over all words followed by re-estimation of upsilon.
void msd_sweep(MsdState& state, const Corpus& corpus, RandomSource& rng);

MsdState msd_train(const Corpus& corpus, double delta, double zeta, int iterations,
                   RandomSource& rng);

/// Word and transition counts both match the current assignments.
bool msd_audit(const MsdState& state, const Corpus& corpus);

struct Decoding {
  std::vector<SlotId> path;
  double log_score = 0.0;
};

/// Most probable slot sequence under upsilon restricted to the candidate set
/// (each row renormalized over the candidates) and psi. Among equally scored
/// paths the lexicographically smallest slot-id sequence is returned.
/// log_score is accumulated left to right as `s += log_transition; s += log_emission`.
Decoding viterbi_decode(const Matrix& psi, const Matrix& upsilon, const Query& query,
                        const CandidateSlotSet& candidates, SlotId misc);

/// Picks the candidate set maximizing
///   mu * sum_i log upsilon(y_i, y_{i+1}) + viterbi log-score.
Selection msd_select(const Matrix& psi, const Matrix& upsilon, const Query& query,
                     const std::vector<CandidateSlotSet>& candidate_sets, double mu, SlotId misc);

}  // namespace slotfill
