#include "slotfill/candidates.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "slotfill/error.hpp"

namespace slotfill {

std::vector<KeyPool> top_t_pools(const Matrix& psi, const SlotRegistry& registry, const Query& query,
                                 std::size_t t) {
  if (t < 1) throw UsageError("top-t must be >= 1");
  std::vector<std::vector<SlotId>> by_key(registry.num_keys());
  for (SlotId m = 0; m < registry.num_slots(); ++m) by_key[registry.slot(m).key].push_back(m);

  std::vector<KeyPool> pools;
  for (KeyId k = 0; k < registry.num_keys(); ++k) {
    if (k == registry.misc_key()) continue;
    std::set<SlotId> pool;
    auto ranked = by_key[k];
    for (TermId v : query.terms) {
      if (v == kUnknownTerm || v >= psi.cols()) continue;
      const std::size_t take = std::min(t, ranked.size());
      std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                        [&](SlotId a, SlotId b) {
                          if (psi(a, v) != psi(b, v)) return psi(a, v) > psi(b, v);
                          return a < b;
                        });
      pool.insert(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take));
    }
    pools.push_back({k, std::vector<SlotId>(pool.begin(), pool.end())});
  }
  return pools;
}

CandidateSetCollection enumerate_sets(const std::vector<KeyPool>& pools, std::size_t max_sets) {
  std::size_t count = 1;
  bool overflow = false;
  for (const auto& p : pools) {
    const std::size_t options = p.slots.size() + 1;
    if (count > std::numeric_limits<std::size_t>::max() / options) {
      overflow = true;
      break;
    }
    count *= options;
  }
  if (overflow || count > max_sets) {
    throw UsageError("candidate-set enumeration would produce " +
                     (overflow ? std::string("more than 2^64") : std::to_string(count)) +
                     " sets, above the limit of " + std::to_string(max_sets));
  }

  CandidateSetCollection out;
  out.pools = pools;
  out.sets.reserve(count);
  // Odometer over choice indices; 0 means the key is absent.
  std::vector<std::size_t> choice(pools.size(), 0);
  for (std::size_t n = 0; n < count; ++n) {
    CandidateSlotSet set;
    set.insert(kMiscSlot);
    for (std::size_t k = 0; k < pools.size(); ++k) {
      if (choice[k] > 0) set.insert(pools[k].slots[choice[k] - 1]);
    }
    out.sets.push_back(std::move(set));
    for (std::size_t k = pools.size(); k-- > 0;) {
      if (++choice[k] <= pools[k].slots.size()) break;
      choice[k] = 0;
    }
  }
  return out;
}

}  // namespace slotfill
