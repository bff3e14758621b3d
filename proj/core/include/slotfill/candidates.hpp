#pragma once

#include <cstddef>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"

namespace slotfill {

/// Per slot-key pool of plausible slots for one query.
struct KeyPool {
  KeyId key = 0;
  std::vector<SlotId> slots;  // sorted ascending
};

struct CandidateSetCollection {
  std::vector<CandidateSlotSet> sets;
  std::vector<KeyPool> pools;
};

/// For every known word and every non-miscellaneous key, the t slots of that
/// key with the highest psi(m, v) (ties to the lowest id); each key's pool is
/// the union over words. Pools are listed for every key in ascending key id.
std::vector<KeyPool> top_t_pools(const Matrix& psi, const SlotRegistry& registry, const Query& query,
                                 std::size_t t);

/// Cartesian product over keys of (absent, pool...) with the miscellaneous
/// slot added to every set. Ordered lexicographically by key (first key most
/// significant), absent before any slot. Throws UsageError naming the count
/// when it would exceed max_sets.
CandidateSetCollection enumerate_sets(const std::vector<KeyPool>& pools, std::size_t max_sets);

}  // namespace slotfill
