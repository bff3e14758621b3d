#include "slotfill/usd.hpp"

#include <limits>

#include "slotfill/error.hpp"

namespace slotfill {

UsdState usd_init(const Corpus& corpus, double delta, RandomSource& rng) {
  if (corpus.records.empty()) throw DataError("cannot train on an empty corpus");
  UsdState state{EmissionCounts(corpus.registry.num_slots(), corpus.registry.num_terms(), delta), {}};
  state.assignments.reserve(corpus.records.size());
  for (const auto& rec : corpus.records) {
    const auto& cands = rec.candidates.slots;
    if (cands.empty()) throw DataError("record with an empty candidate set");
    std::vector<SlotId> y(rec.query.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = cands[rng.uniform_index(cands.size())];
      state.emission.counts.increment(y[i], rec.query.terms[i]);
    }
    state.assignments.push_back(std::move(y));
  }
  return state;
}

std::vector<double> usd_conditional(const EmissionCounts& emission, const EngagementRecord& record,
                                    std::size_t i) {
  const TermId v = record.query.terms.at(i);
  const auto& cands = record.candidates.slots;
  std::vector<double> log_w(cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j) log_w[j] = emission.log_weight(cands[j], v);
  return normalize_log(log_w);
}

void usd_sweep(UsdState& state, const Corpus& corpus, RandomSource& rng) {
  auto& counts = state.emission.counts;
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const auto& rec = corpus.records[q];
    auto& y = state.assignments[q];
    const auto& cands = rec.candidates.slots;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const TermId v = rec.query.terms[i];
      counts.decrement(y[i], v);
      if (cands.size() == 1) {
        y[i] = cands[0];
      } else {
        const auto probs = usd_conditional(state.emission, rec, i);
        y[i] = cands[sample_index(probs, rng)];
      }
      counts.increment(y[i], v);
    }
  }
}

UsdState usd_train(const Corpus& corpus, double delta, int iterations, RandomSource& rng) {
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  auto words = rng.child(kWordStream);
  auto state = usd_init(corpus, delta, words);
  for (int it = 0; it < iterations; ++it) usd_sweep(state, corpus, words);
  return state;
}

bool usd_audit(const UsdState& state, const Corpus& corpus) {
  const auto& counts = state.emission.counts;
  CountTable expected(counts.rows(), counts.cols());
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const auto& rec = corpus.records[q];
    for (std::size_t i = 0; i < rec.query.size(); ++i) {
      if (!rec.candidates.contains(state.assignments[q][i])) return false;
      expected.increment(state.assignments[q][i], rec.query.terms[i]);
    }
  }
  return counts.audit() && expected == counts;
}

std::vector<SlotId> usd_annotate(const Matrix& psi, const Query& query,
                                 const CandidateSlotSet& candidates, SlotId misc) {
  if (candidates.slots.empty()) throw UsageError("empty candidate set");
  std::vector<SlotId> y(query.size(), misc);
  for (std::size_t i = 0; i < query.size(); ++i) {
    const TermId v = query.terms[i];
    if (v == kUnknownTerm || v >= psi.cols()) continue;
    SlotId best = candidates.slots[0];
    for (SlotId m : candidates.slots) {
      if (psi(m, v) > psi(best, v)) best = m;
    }
    y[i] = best;
  }
  return y;
}

double usd_tagging_log_likelihood(const Matrix& psi, const Query& query,
                                  const CandidateSlotSet& candidates, SlotId misc) {
  const auto y = usd_annotate(psi, query, candidates, misc);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += log_emission(psi, y[i], query.terms[i], misc);
  return total;
}

Selection usd_select(const Matrix& psi, const Query& query,
                     const std::vector<CandidateSlotSet>& candidate_sets, SlotId misc) {
  if (candidate_sets.empty()) throw UsageError("no candidate sets to select from");
  Selection best;
  best.score = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < candidate_sets.size(); ++s) {
    const double score = usd_tagging_log_likelihood(psi, query, candidate_sets[s], misc);
    if (s == 0 || score > best.score) {
      best.score = score;
      best.set_index = s;
    }
  }
  best.slots = usd_annotate(psi, query, candidate_sets[best.set_index], misc);
  return best;
}

}  // namespace slotfill
