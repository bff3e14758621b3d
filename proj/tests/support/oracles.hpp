#pragma once

// Brute-force reference computations used only by tests. Nothing here reuses
// the library's samplers or decoders; they are evaluated straight from the
// model definitions.

#include <cstddef>
#include <map>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"

namespace slotfill::oracle {

/// log P(Y, Q | C) of USD with psi integrated out, up to a constant that
/// does not depend on Y.
double usd_log_joint(const Corpus& corpus, const std::vector<std::vector<SlotId>>& y, double delta);

/// log P(C, Z) of the CUSD category side with phi and chi integrated out.
double cusd_category_log_joint(const Corpus& corpus, const std::vector<std::size_t>& z, std::size_t K,
                               double alpha, double beta);

/// log P(Y, Z, Q | C) of CUSDSS as implemented: the intent is the set of
/// slots used by y, each record carries gamma^|a| (1-gamma)^(|c|-|a|) and one
/// 1/|a| factor, and phi, chi, psi are integrated out.
double cusdss_log_joint(const Corpus& corpus, const std::vector<std::size_t>& z,
                        const std::vector<std::vector<SlotId>>& y, std::size_t K, double alpha,
                        double beta, double gamma, double delta);

struct CusdssConfiguration {
  std::vector<std::size_t> z;
  std::vector<std::vector<SlotId>> y;
  auto operator<=>(const CusdssConfiguration&) const = default;
};

/// Normalized probabilities of every (Z, Y) configuration of a small corpus.
std::map<CusdssConfiguration, double> cusdss_enumerate(const Corpus& corpus, std::size_t K, double alpha,
                                                       double beta, double gamma, double delta);

struct PathScore {
  std::vector<SlotId> path;
  double log_score = 0.0;
};

/// Scores every slot sequence over the candidate set with transitions
/// renormalized over the candidates, accumulating left to right as
/// `s += log_transition; s += log_emission`, and returns the best one
/// (the lexicographically smallest among exact ties).
PathScore exhaustive_viterbi(const Matrix& psi, const Matrix& upsilon, const Query& query,
                             const CandidateSlotSet& candidates, SlotId misc);

}  // namespace slotfill::oracle
