#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"
#include "slotfill/emission.hpp"
#include "slotfill/usd.hpp"

namespace slotfill {

inline constexpr std::uint64_t kBlockStream = 2;

struct CusdssHyper {
  std::size_t num_categories = 100;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.7;
  double delta = 0.1;
};

/// Sufficient statistics of CUSDSS. Categories are distributions over the
/// extended slot set: column m counts candidate m selected into the intent,
/// column M + m counts it rejected (the dummy slot "not m").
struct CusdssCounts {
  EmissionCounts emission;
  std::vector<Count> category_counts;  // U
  CountTable selection;                // K x 2M
};

inline std::size_t rejected_column(SlotId m, std::size_t num_slots) { return num_slots + m; }

/// Training state. The intent a_q is not stored: it is always the set of
/// slots used by the record's assignment y_q.
struct CusdssState {
  CusdssHyper hyper;
  CusdssCounts counts;
  std::vector<std::size_t> categories;
  std::vector<std::vector<SlotId>> assignments;
};

struct CusdssModel {
  CusdssHyper hyper;
  CusdssCounts counts;
  Matrix psi;
  std::vector<double> phi;
  Matrix chi;  // K x 2M

  CusdssModel(CusdssHyper hyper, CusdssCounts counts);
  std::size_t num_slots() const { return psi.rows(); }
};

/// Per candidate (in candidate-set order): is the slot used by some word of y.
std::vector<bool> used_candidates(const CandidateSlotSet& candidates, std::span<const SlotId> y);

/// Normalized conditional over categories given the record's candidates and
/// which of them are selected. U and selection counts must exclude the record.
std::vector<double> cusdss_category_conditional(const CusdssHyper& hyper, std::span<const Count> U,
                                                const CountTable& selection,
                                                const CandidateSlotSet& candidates,
                                                const std::vector<bool>& selected);

/// Normalized conditional over the candidates for word i with category z.
/// `y` is the record's current assignment (entry i is ignored); the intent
/// without word i is the set of slots used by the other words. Counts must
/// exclude word i (emission) and the whole record (selection).
std::vector<double> cusdss_position_conditional(const CusdssHyper& hyper,
                                                const EmissionCounts& emission,
                                                const CountTable& selection,
                                                const EngagementRecord& record,
                                                std::span<const SlotId> y, std::size_t i,
                                                std::size_t z);

CusdssState cusdss_init(const Corpus& corpus, const CusdssHyper& hyper, RandomSource& rng);

/// Block update of record q: resample z given the intent, then every word's
/// slot in order given z (the intent follows y). Counts stay consistent.
void cusdss_block_update(CusdssState& state, const Corpus& corpus, std::size_t q,
                         RandomSource& rng);

CusdssState cusdss_train(const Corpus& corpus, const CusdssHyper& hyper, int iterations,
                         RandomSource& rng);

bool cusdss_audit(const CusdssState& state, const Corpus& corpus);

struct CusdssInference {
  std::size_t category = 0;
  std::vector<SlotId> slots;
  std::vector<bool> selected;  // per candidate, in candidate-set order
};

/// Block Gibbs inference for one unseen query against frozen counts.
/// `iterations` below 1 is raised to 1. Unknown terms are pinned to the
/// miscellaneous slot.
CusdssInference cusdss_infer(const CusdssModel& model, const Query& query,
                             const CandidateSlotSet& candidates, int iterations, RandomSource& rng);

/// How a rejected candidate enters the set prior: as written,
/// (1 - chi(z, not m)), or as the rejected-slot probability chi(z, not m).
enum class RejectedTerm { kOneMinusNegated, kNegated };

/// log phi_z + sum_j [selected_j ? log chi(z, m_j) : log rejected-term].
double cusdss_set_log_prior(const CusdssModel& model, const CandidateSlotSet& candidates,
                            const CusdssInference& inferred, RejectedTerm rejected);

/// Runs inference under every candidate set (set s uses rng.child(s)) and
/// picks the set maximizing mu * log P(c, z) + sum_i log psi(y_i, v_i).
Selection cusdss_select(const CusdssModel& model, const Query& query,
                        const std::vector<CandidateSlotSet>& candidate_sets, double mu,
                        int infer_iterations, RandomSource& rng,
                        RejectedTerm rejected = RejectedTerm::kOneMinusNegated);

}  // namespace slotfill
