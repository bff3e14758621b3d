#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"
#include "slotfill/emission.hpp"

namespace slotfill {

/// Stream ids handed to RandomSource::child by the trainers. Word tagging in
/// every model uses kWordStream so USD and CUSD word sweeps see identical draws.
inline constexpr std::uint64_t kWordStream = 0;
inline constexpr std::uint64_t kCategoryStream = 1;

/// Uniform Slot Distribution training state: slot assignments for every
/// query word plus the slot x term counts they induce.
struct UsdState {
  EmissionCounts emission;
  std::vector<std::vector<SlotId>> assignments;  // per record, one slot per word
};

/// Frozen USD parameters used for inference and persistence.
struct UsdModel {
  EmissionCounts emission;
  Matrix psi;

  explicit UsdModel(EmissionCounts counts) : emission(std::move(counts)), psi(emission.posterior()) {}
};

/// Draws each word's slot uniformly from its record's candidate set.
UsdState usd_init(const Corpus& corpus, double delta, RandomSource& rng);

/// Normalized collapsed conditional over record.candidates (in candidate-set
/// order) for word i. The counts in `state` must already exclude word i.
std::vector<double> usd_conditional(const EmissionCounts& emission, const EngagementRecord& record,
                                    std::size_t i);

/// One full collapsed Gibbs sweep in corpus order.
void usd_sweep(UsdState& state, const Corpus& corpus, RandomSource& rng);

/// Initializes from rng.child(kWordStream) and runs `iterations` sweeps.
UsdState usd_train(const Corpus& corpus, double delta, int iterations, RandomSource& rng);

/// True when the counts equal the histogram of the current assignments.
bool usd_audit(const UsdState& state, const Corpus& corpus);

/// Per-word argmax of psi over the candidate set; ties go to the lowest slot
/// id and unknown terms get the miscellaneous slot.
std::vector<SlotId> usd_annotate(const Matrix& psi, const Query& query,
                                 const CandidateSlotSet& candidates, SlotId misc);

/// Sum over words of max_{m in c} log psi(m, v): the tagging log-likelihood
/// of the per-word argmax under a candidate set.
double usd_tagging_log_likelihood(const Matrix& psi, const Query& query,
                                  const CandidateSlotSet& candidates, SlotId misc);

/// Candidate-set choice plus the annotation under it.
struct Selection {
  std::vector<SlotId> slots;
  std::size_t set_index = 0;
  double score = 0.0;
};

/// USD has a uniform prior over candidate sets, so the set with the best
/// tagging likelihood wins (lowest index on ties).
Selection usd_select(const Matrix& psi, const Query& query,
                     const std::vector<CandidateSlotSet>& candidate_sets, SlotId misc);

}  // namespace slotfill
