#include "slotfill/cusdss.hpp"

#include <algorithm>
#include <cmath>

#include "slotfill/cusd.hpp"
#include "slotfill/error.hpp"

namespace slotfill {

namespace {

std::size_t candidate_index(const CandidateSlotSet& c, SlotId m) {
  return static_cast<std::size_t>(std::lower_bound(c.slots.begin(), c.slots.end(), m) - c.slots.begin());
}

void check_hyper(const CusdssHyper& h) {
  if (h.num_categories < 1) throw UsageError("number of categories must be >= 1");
  if (!(h.gamma > 0.0 && h.gamma < 1.0)) throw UsageError("gamma must lie in (0, 1)");
}

/// Word counts seen by the sampler during training: the global table.
struct GlobalWords {
  EmissionCounts& emission;
  double log_weight(SlotId m, TermId v) const { return emission.log_weight(m, v); }
  void add(SlotId m, TermId v) { emission.counts.increment(m, v); }
  void remove(SlotId m, TermId v) { emission.counts.decrement(m, v); }
};

struct FrozenWords {
  const EmissionCounts& emission;
  double log_weight(SlotId m, TermId v) const { return emission.log_weight(m, v); }
};

/// Word counts seen during inference: frozen global table plus the query's
/// own words.
class OverlayWords {
 public:
  explicit OverlayWords(const EmissionCounts& base) : base_(base) {}

  double log_weight(SlotId m, TermId v) const {
    Count cell = base_.counts.at(m, v);
    Count total = base_.counts.row_total(m);
    for (const auto& e : local_) {
      if (e.slot != m) continue;
      total += e.count;
      if (e.term == v) cell += e.count;
    }
    return std::log((base_.delta + static_cast<double>(cell)) /
                    (base_.delta * static_cast<double>(base_.num_terms()) + static_cast<double>(total)));
  }
  void add(SlotId m, TermId v) { entry(m, v).count += 1; }
  void remove(SlotId m, TermId v) {
    auto& e = entry(m, v);
    if (e.count <= 0) throw std::logic_error("query-local word count below zero");
    e.count -= 1;
  }

 private:
  struct Entry {
    SlotId slot;
    TermId term;
    Count count;
  };
  Entry& entry(SlotId m, TermId v) {
    for (auto& e : local_) {
      if (e.slot == m && e.term == v) return e;
    }
    local_.push_back({m, v, 0});
    return local_.back();
  }

  const EmissionCounts& base_;
  std::vector<Entry> local_;
};

std::vector<double> category_log_weights(const CusdssHyper& h, std::span<const Count> U,
                                         const CountTable& selection, const CandidateSlotSet& c,
                                         const std::vector<bool>& selected) {
  const std::size_t num_slots = selection.cols() / 2;
  const double beta_total = h.beta * static_cast<double>(selection.cols());
  std::vector<double> log_w(U.size());
  for (std::size_t k = 0; k < U.size(); ++k) {
    double w = std::log(h.alpha + static_cast<double>(U[k]));
    for (std::size_t j = 0; j < c.size(); ++j) {
      const std::size_t col = selected[j] ? c.slots[j] : rejected_column(c.slots[j], num_slots);
      w += std::log(h.beta + static_cast<double>(selection.at(k, col)));
    }
    const double row_total = beta_total + static_cast<double>(selection.row_total(k));
    for (std::size_t i = 0; i < c.size(); ++i) w -= std::log(row_total + static_cast<double>(i));
    log_w[k] = w;
  }
  return log_w;
}

/// usage[j] = number of words (other than the one being resampled) using
/// candidate j.
template <class Words>
std::vector<double> position_log_weights(const CusdssHyper& h, const Words& words,
                                         const CountTable& selection, const CandidateSlotSet& c,
                                         const std::vector<int>& usage, TermId v, std::size_t z) {
  const std::size_t num_slots = selection.cols() / 2;
  const auto intent_size =
      static_cast<std::size_t>(std::count_if(usage.begin(), usage.end(), [](int u) { return u > 0; }));
  const double log_odds = std::log(h.gamma / (1.0 - h.gamma));

  std::vector<double> log_w(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const SlotId m = c.slots[j];
    const bool in_intent = usage[j] > 0;
    const std::size_t new_size = intent_size + (in_intent ? 0 : 1);
    double w = words.log_weight(m, v) - std::log(static_cast<double>(new_size));
    if (!in_intent) {
      w += log_odds;
      w += std::log(h.beta + static_cast<double>(selection.at(z, m)));
      w -= std::log(h.beta + static_cast<double>(selection.at(z, rejected_column(m, num_slots))));
    }
    log_w[j] = w;
  }
  return log_w;
}

/// Shared block update: z given the intent, then each word given z.
template <class Words>
void block_update(const CusdssHyper& h, Words& words, std::span<const Count> U,
                  const CountTable& selection, const Query& query, const CandidateSlotSet& c,
                  std::size_t& z, std::vector<SlotId>& y, RandomSource& rng) {
  std::vector<int> usage(c.size(), 0);
  for (SlotId m : y) ++usage[candidate_index(c, m)];

  if (U.size() > 1) {
    std::vector<bool> selected(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) selected[j] = usage[j] > 0;
    z = sample_log_index(category_log_weights(h, U, selection, c, selected), rng);
  }

  if (c.size() == 1) return;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const TermId v = query.terms[i];
    if (v == kUnknownTerm) continue;
    words.remove(y[i], v);
    --usage[candidate_index(c, y[i])];
    const auto j = sample_log_index(position_log_weights(h, words, selection, c, usage, v, z), rng);
    y[i] = c.slots[j];
    ++usage[j];
    words.add(y[i], v);
  }
}

void add_record_selection(CusdssCounts& counts, const CandidateSlotSet& c,
                          const std::vector<bool>& selected, std::size_t z) {
  const std::size_t num_slots = counts.selection.cols() / 2;
  ++counts.category_counts[z];
  for (std::size_t j = 0; j < c.size(); ++j) {
    counts.selection.increment(z, selected[j] ? c.slots[j] : rejected_column(c.slots[j], num_slots));
  }
}

void remove_record_selection(CusdssCounts& counts, const CandidateSlotSet& c,
                             const std::vector<bool>& selected, std::size_t z) {
  const std::size_t num_slots = counts.selection.cols() / 2;
  if (counts.category_counts[z] <= 0) throw std::logic_error("category count below zero");
  --counts.category_counts[z];
  for (std::size_t j = 0; j < c.size(); ++j) {
    counts.selection.decrement(z, selected[j] ? c.slots[j] : rejected_column(c.slots[j], num_slots));
  }
}

}  // namespace

CusdssModel::CusdssModel(CusdssHyper hyper_, CusdssCounts counts_)
    : hyper(hyper_),
      counts(std::move(counts_)),
      psi(counts.emission.posterior()),
      phi(category_posterior(counts.category_counts, hyper.alpha)),
      chi(slot_posterior(counts.selection, hyper.beta)) {}

std::vector<bool> used_candidates(const CandidateSlotSet& candidates, std::span<const SlotId> y) {
  std::vector<bool> used(candidates.size(), false);
  for (SlotId m : y) {
    const auto j = candidate_index(candidates, m);
    if (j >= candidates.size() || candidates.slots[j] != m) {
      throw std::logic_error("assignment outside the candidate set");
    }
    used[j] = true;
  }
  return used;
}

std::vector<double> cusdss_category_conditional(const CusdssHyper& hyper, std::span<const Count> U,
                                                const CountTable& selection,
                                                const CandidateSlotSet& candidates,
                                                const std::vector<bool>& selected) {
  return normalize_log(category_log_weights(hyper, U, selection, candidates, selected));
}

std::vector<double> cusdss_position_conditional(const CusdssHyper& hyper,
                                                const EmissionCounts& emission,
                                                const CountTable& selection,
                                                const EngagementRecord& record,
                                                std::span<const SlotId> y, std::size_t i,
                                                std::size_t z) {
  const auto& c = record.candidates;
  std::vector<int> usage(c.size(), 0);
  for (std::size_t p = 0; p < y.size(); ++p) {
    if (p != i) ++usage[candidate_index(c, y[p])];
  }
  const FrozenWords words{emission};
  return normalize_log(
      position_log_weights(hyper, words, selection, c, usage, record.query.terms.at(i), z));
}

CusdssState cusdss_init(const Corpus& corpus, const CusdssHyper& hyper, RandomSource& rng) {
  check_hyper(hyper);
  auto words = rng.child(kWordStream);
  auto cats = rng.child(kCategoryStream);
  auto tagging = usd_init(corpus, hyper.delta, words);

  CusdssState state;
  state.hyper = hyper;
  state.counts.emission = std::move(tagging.emission);
  state.assignments = std::move(tagging.assignments);
  state.counts.category_counts.assign(hyper.num_categories, 0);
  state.counts.selection = CountTable(hyper.num_categories, 2 * corpus.registry.num_slots());
  state.categories.reserve(corpus.records.size());
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const std::size_t z = cats.uniform_index(hyper.num_categories);
    state.categories.push_back(z);
    const auto& c = corpus.records[q].candidates;
    add_record_selection(state.counts, c, used_candidates(c, state.assignments[q]), z);
  }
  return state;
}

void cusdss_block_update(CusdssState& state, const Corpus& corpus, std::size_t q,
                         RandomSource& rng) {
  const auto& rec = corpus.records.at(q);
  auto& y = state.assignments[q];
  auto& z = state.categories[q];
  remove_record_selection(state.counts, rec.candidates, used_candidates(rec.candidates, y), z);
  GlobalWords words{state.counts.emission};
  block_update(state.hyper, words, state.counts.category_counts, state.counts.selection, rec.query,
               rec.candidates, z, y, rng);
  add_record_selection(state.counts, rec.candidates, used_candidates(rec.candidates, y), z);
}

CusdssState cusdss_train(const Corpus& corpus, const CusdssHyper& hyper, int iterations,
                         RandomSource& rng) {
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  auto state = cusdss_init(corpus, hyper, rng);
  auto block = rng.child(kBlockStream);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t q = 0; q < corpus.records.size(); ++q) cusdss_block_update(state, corpus, q, block);
  }
  return state;
}

bool cusdss_audit(const CusdssState& state, const Corpus& corpus) {
  const auto& counts = state.counts;
  const std::size_t num_slots = corpus.registry.num_slots();
  CountTable words(counts.emission.counts.rows(), counts.emission.counts.cols());
  std::vector<Count> u(state.hyper.num_categories, 0);
  CountTable sel(state.hyper.num_categories, 2 * num_slots);
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const auto& rec = corpus.records[q];
    const auto& y = state.assignments[q];
    if (y.size() != rec.query.size() || y.empty()) return false;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!rec.candidates.contains(y[i])) return false;
      words.increment(y[i], rec.query.terms[i]);
    }
    const std::size_t z = state.categories[q];
    if (z >= state.hyper.num_categories) return false;
    ++u[z];
    const auto selected = used_candidates(rec.candidates, y);
    for (std::size_t j = 0; j < rec.candidates.size(); ++j) {
      const SlotId m = rec.candidates.slots[j];
      sel.increment(z, selected[j] ? m : rejected_column(m, num_slots));
    }
  }
  return counts.emission.counts.audit() && counts.selection.audit() &&
         words == counts.emission.counts && u == counts.category_counts && sel == counts.selection;
}

CusdssInference cusdss_infer(const CusdssModel& model, const Query& query,
                             const CandidateSlotSet& candidates, int iterations, RandomSource& rng) {
  if (candidates.slots.empty()) throw UsageError("empty candidate set");
  const SlotId misc = kMiscSlot;
  iterations = std::max(iterations, 1);

  OverlayWords words(model.counts.emission);
  CusdssInference out;
  out.category = rng.uniform_index(model.hyper.num_categories);
  out.slots.resize(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    const TermId v = query.terms[i];
    if (v == kUnknownTerm || v >= model.counts.emission.num_terms()) {
      out.slots[i] = misc;
      continue;
    }
    out.slots[i] = candidates.slots[rng.uniform_index(candidates.size())];
    words.add(out.slots[i], v);
  }

  // Unknown terms are marked so block_update leaves them alone.
  Query known = query;
  for (auto& t : known.terms) {
    if (t >= model.counts.emission.num_terms()) t = kUnknownTerm;
  }
  for (int it = 0; it < iterations; ++it) {
    block_update(model.hyper, words, model.counts.category_counts, model.counts.selection, known,
                 candidates, out.category, out.slots, rng);
  }
  out.selected = used_candidates(candidates, out.slots);
  return out;
}

double cusdss_set_log_prior(const CusdssModel& model, const CandidateSlotSet& candidates,
                            const CusdssInference& inferred, RejectedTerm rejected) {
  const std::size_t z = inferred.category;
  const std::size_t num_slots = model.num_slots();
  double lp = std::log(model.phi[z]);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const SlotId m = candidates.slots[j];
    if (inferred.selected[j]) {
      lp += std::log(model.chi(z, m));
    } else {
      const double neg = model.chi(z, rejected_column(m, num_slots));
      lp += rejected == RejectedTerm::kNegated ? std::log(neg) : std::log1p(-neg);
    }
  }
  return lp;
}

Selection cusdss_select(const CusdssModel& model, const Query& query,
                        const std::vector<CandidateSlotSet>& candidate_sets, double mu,
                        int infer_iterations, RandomSource& rng, RejectedTerm rejected) {
  if (candidate_sets.empty()) throw UsageError("no candidate sets to select from");
  const SlotId misc = kMiscSlot;
  Selection best;
  for (std::size_t s = 0; s < candidate_sets.size(); ++s) {
    auto set_rng = rng.child(s);
    auto inferred = cusdss_infer(model, query, candidate_sets[s], infer_iterations, set_rng);
    double score = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      score += log_emission(model.psi, inferred.slots[i], query.terms[i], misc);
    }
    if (mu != 0.0) score += mu * cusdss_set_log_prior(model, candidate_sets[s], inferred, rejected);
    if (s == 0 || score > best.score) {
      best.score = score;
      best.set_index = s;
      best.slots = std::move(inferred.slots);
    }
  }
  return best;
}

}  // namespace slotfill
