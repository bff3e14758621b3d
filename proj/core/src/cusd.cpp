#include "slotfill/cusd.hpp"

#include <cmath>
#include <numeric>

#include "slotfill/error.hpp"

namespace slotfill {

namespace {

void add_record(CusdState& s, const CandidateSlotSet& c, std::size_t k) {
  ++s.category_counts[k];
  for (SlotId m : c.slots) s.category_slots.increment(k, m);
}

void remove_record(CusdState& s, const CandidateSlotSet& c, std::size_t k) {
  if (s.category_counts[k] <= 0) throw std::logic_error("category count below zero");
  --s.category_counts[k];
  for (SlotId m : c.slots) s.category_slots.decrement(k, m);
}

void check_hyper(const CusdHyper& h) {
  if (h.num_categories < 1) throw UsageError("number of categories must be >= 1");
}

}  // namespace

CusdModel::CusdModel(EmissionCounts counts, CusdHyper hyper_, std::vector<Count> category_counts_,
                     CountTable category_slots_)
    : emission(std::move(counts)),
      hyper(hyper_),
      category_counts(std::move(category_counts_)),
      category_slots(std::move(category_slots_)),
      psi(emission.posterior()),
      phi(category_posterior(category_counts, hyper.alpha)),
      chi(slot_posterior(category_slots, hyper.beta)) {}

std::vector<double> category_posterior(std::span<const Count> category_counts, double alpha) {
  return posterior_mean(DirichletPrior::symmetric(category_counts.size(), alpha), category_counts);
}

Matrix slot_posterior(const CountTable& category_slots, double beta) {
  const auto prior = DirichletPrior::symmetric(category_slots.cols(), beta);
  Matrix chi(category_slots.rows(), category_slots.cols());
  for (std::size_t k = 0; k < category_slots.rows(); ++k) {
    const auto row = posterior_mean(prior, category_slots.row(k));
    std::copy(row.begin(), row.end(), chi.row(k).begin());
  }
  return chi;
}

std::vector<double> cusd_category_conditional(const CusdHyper& hyper, std::span<const Count> U,
                                              const CountTable& R,
                                              const CandidateSlotSet& candidates) {
  const std::size_t num_k = U.size();
  const double beta_total = hyper.beta * static_cast<double>(R.cols());
  std::vector<double> log_w(num_k);
  for (std::size_t k = 0; k < num_k; ++k) {
    double w = std::log(hyper.alpha + static_cast<double>(U[k]));
    for (SlotId m : candidates.slots) w += std::log(hyper.beta + static_cast<double>(R.at(k, m)));
    const double row_total = beta_total + static_cast<double>(R.row_total(k));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      w -= std::log(row_total + static_cast<double>(i));
    }
    log_w[k] = w;
  }
  return normalize_log(log_w);
}

void cusd_category_sweep(CusdState& state, const Corpus& corpus, RandomSource& rng) {
  if (state.hyper.num_categories == 1) return;
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const auto& c = corpus.records[q].candidates;
    remove_record(state, c, state.categories[q]);
    const auto probs =
        cusd_category_conditional(state.hyper, state.category_counts, state.category_slots, c);
    state.categories[q] = sample_index(probs, rng);
    add_record(state, c, state.categories[q]);
  }
}

CusdState cusd_train(const Corpus& corpus, const CusdHyper& hyper, int iterations,
                     RandomSource& rng) {
  check_hyper(hyper);
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  auto words = rng.child(kWordStream);
  auto cats = rng.child(kCategoryStream);

  CusdState state;
  state.hyper = hyper;
  state.tagging = usd_init(corpus, hyper.delta, words);
  state.category_counts.assign(hyper.num_categories, 0);
  state.category_slots = CountTable(hyper.num_categories, corpus.registry.num_slots());
  state.categories.reserve(corpus.records.size());
  for (const auto& rec : corpus.records) {
    const std::size_t k = cats.uniform_index(hyper.num_categories);
    state.categories.push_back(k);
    add_record(state, rec.candidates, k);
  }

  for (int it = 0; it < iterations; ++it) {
    usd_sweep(state.tagging, corpus, words);
    cusd_category_sweep(state, corpus, cats);
  }
  return state;
}

bool cusd_audit(const CusdState& state, const Corpus& corpus) {
  if (!usd_audit(state.tagging, corpus)) return false;
  std::vector<Count> u(state.hyper.num_categories, 0);
  CountTable r(state.hyper.num_categories, corpus.registry.num_slots());
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const std::size_t k = state.categories[q];
    if (k >= state.hyper.num_categories) return false;
    ++u[k];
    for (SlotId m : corpus.records[q].candidates.slots) r.increment(k, m);
  }
  return u == state.category_counts && r == state.category_slots && state.category_slots.audit();
}

double cusd_set_log_prior(std::span<const double> phi, const Matrix& chi,
                          const CandidateSlotSet& candidates) {
  const std::size_t k = cusd_map_category(phi, chi, candidates);
  double lp = std::log(phi[k]);
  for (SlotId m : candidates.slots) lp += std::log(chi(k, m));
  return lp;
}

std::size_t cusd_map_category(std::span<const double> phi, const Matrix& chi,
                              const CandidateSlotSet& candidates) {
  std::vector<double> log_w(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    double w = std::log(phi[k]);
    for (SlotId m : candidates.slots) w += std::log(chi(k, m));
    log_w[k] = w;
  }
  return argmax(log_w);
}

Selection cusd_select(const Matrix& psi, std::span<const double> phi, const Matrix& chi,
                      const Query& query, const std::vector<CandidateSlotSet>& candidate_sets,
                      double mu, SlotId misc) {
  if (candidate_sets.empty()) throw UsageError("no candidate sets to select from");
  Selection best;
  for (std::size_t s = 0; s < candidate_sets.size(); ++s) {
    const auto& c = candidate_sets[s];
    double score = usd_tagging_log_likelihood(psi, query, c, misc);
    if (mu != 0.0) score += mu * cusd_set_log_prior(phi, chi, c);
    if (s == 0 || score > best.score) {
      best.score = score;
      best.set_index = s;
    }
  }
  best.slots = usd_annotate(psi, query, candidate_sets[best.set_index], misc);
  return best;
}

}  // namespace slotfill
