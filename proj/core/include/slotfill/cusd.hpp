#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"
#include "slotfill/emission.hpp"
#include "slotfill/usd.hpp"

namespace slotfill {

struct CusdHyper {
  std::size_t num_categories = 60;
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 0.1;
};

/// Correlated USD: every candidate set is drawn from one latent product
/// category (a mixture of unigrams over slots). Word tagging with an observed
/// candidate set is exactly USD, so the word side reuses UsdState.
struct CusdState {
  UsdState tagging;
  CusdHyper hyper;
  std::vector<Count> category_counts;  // U(k): records assigned to category k
  CountTable category_slots;           // R(k, m): slot m drawn from category k
  std::vector<std::size_t> categories;  // z per record
};

struct CusdModel {
  EmissionCounts emission;
  CusdHyper hyper;
  std::vector<Count> category_counts;
  CountTable category_slots;
  Matrix psi;
  std::vector<double> phi;
  Matrix chi;

  CusdModel(EmissionCounts counts, CusdHyper hyper, std::vector<Count> category_counts,
            CountTable category_slots);
};

/// phi = posterior mean of U under alpha; chi rows = posterior means of R under beta.
std::vector<double> category_posterior(std::span<const Count> category_counts, double alpha);
Matrix slot_posterior(const CountTable& category_slots, double beta);

/// Normalized conditional over categories for one candidate set. `U` and `R`
/// must already exclude the record being resampled.
std::vector<double> cusd_category_conditional(const CusdHyper& hyper, std::span<const Count> U,
                                              const CountTable& R,
                                              const CandidateSlotSet& candidates);

/// Resamples every record's category in corpus order.
void cusd_category_sweep(CusdState& state, const Corpus& corpus, RandomSource& rng);

/// Alternates a USD word sweep (rng.child(kWordStream)) with a category sweep
/// (rng.child(kCategoryStream)), `iterations` times.
CusdState cusd_train(const Corpus& corpus, const CusdHyper& hyper, int iterations,
                     RandomSource& rng);

bool cusd_audit(const CusdState& state, const Corpus& corpus);

/// argmax_k phi_k * prod_{m in c} chi_{k,m}; ties go to the lowest k.
std::size_t cusd_map_category(std::span<const double> phi, const Matrix& chi,
                              const CandidateSlotSet& candidates);

/// log phi_z + sum_{m in c} log chi_{z,m} for the MAP category z.
double cusd_set_log_prior(std::span<const double> phi, const Matrix& chi,
                          const CandidateSlotSet& candidates);

/// Picks the candidate set maximizing mu * log P(c, z) + USD tagging
/// log-likelihood and returns the USD annotation under it.
Selection cusd_select(const Matrix& psi, std::span<const double> phi, const Matrix& chi,
                      const Query& query, const std::vector<CandidateSlotSet>& candidate_sets,
                      double mu, SlotId misc);

}  // namespace slotfill
