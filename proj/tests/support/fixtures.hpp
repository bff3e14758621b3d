#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"

namespace slotfill::testing {

inline Corpus corpus_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return ingest_engagement(in);
}

/// Random corpus with 1..max_records records over |V| <= max_terms and
/// |M| <= max_slots (miscellaneous included). Every non-misc slot has its own
/// key so any subset forms a valid candidate set.
inline Corpus random_toy_corpus(RandomSource& rng, std::size_t max_records = 3, std::size_t max_terms = 5,
                                std::size_t max_slots = 4, std::size_t max_len = 3) {
  Corpus corpus;
  const std::size_t V = 1 + rng.uniform_index(max_terms);
  const std::size_t M = 1 + rng.uniform_index(max_slots);
  for (std::size_t v = 0; v < V; ++v) corpus.registry.intern_term("t" + std::to_string(v));
  for (std::size_t m = 1; m < M; ++m) corpus.registry.intern_slot("k" + std::to_string(m), "s" + std::to_string(m));
  const std::size_t R = 1 + rng.uniform_index(max_records);
  for (std::size_t r = 0; r < R; ++r) {
    EngagementRecord rec;
    const std::size_t len = 1 + rng.uniform_index(max_len);
    for (std::size_t i = 0; i < len; ++i) rec.query.terms.push_back(static_cast<TermId>(rng.uniform_index(V)));
    rec.candidates.insert(kMiscSlot);
    for (std::size_t m = 1; m < M; ++m) {
      if (rng.uniform() < 0.6) rec.candidates.insert(static_cast<SlotId>(m));
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

/// Random row-stochastic matrix with strictly positive entries.
inline Matrix random_stochastic(std::size_t rows, std::size_t cols, RandomSource& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += (m(r, c) = 0.05 + rng.uniform());
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= total;
  }
  return m;
}

}  // namespace slotfill::testing
