#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slotfill/distributions.hpp"

namespace slotfill {

using TermId = std::uint32_t;
using SlotId = std::uint32_t;
using KeyId = std::uint32_t;

/// Term id used at inference time for words the registry has never seen.
inline constexpr TermId kUnknownTerm = std::numeric_limits<TermId>::max();

inline constexpr std::string_view kMiscKey = "miscellaneous";
/// The registry always interns the miscellaneous slot first.
inline constexpr SlotId kMiscSlot = 0;

/// Lowercases and splits on whitespace.
std::vector<std::string> tokenize(std::string_view text);

struct Slot {
  KeyId key = 0;
  std::string value;
  bool operator==(const Slot&) const = default;
};

/// A (key, value) pair as it appears in input and output files.
struct SlotText {
  std::string key;
  std::string value;
  bool operator==(const SlotText&) const = default;
  auto operator<=>(const SlotText&) const = default;
};

/// Dense bijections term<->id, key<->id and (key, value)<->slot id.
///
/// The reserved miscellaneous key and slot always exist and always have id 0.
class SlotRegistry {
 public:
  SlotRegistry();

  TermId intern_term(std::string_view term);
  KeyId intern_key(std::string_view key);
  SlotId intern_slot(std::string_view key, std::string_view value);

  std::optional<TermId> find_term(std::string_view term) const;
  std::optional<KeyId> find_key(std::string_view key) const;
  std::optional<SlotId> find_slot(std::string_view key, std::string_view value) const;
  /// Term id or kUnknownTerm.
  TermId lookup_term(std::string_view term) const;

  std::size_t num_terms() const { return terms_.size(); }
  std::size_t num_slots() const { return slots_.size(); }
  std::size_t num_keys() const { return keys_.size(); }

  const std::string& term(TermId id) const { return terms_.at(id); }
  const Slot& slot(SlotId id) const { return slots_.at(id); }
  const std::string& key(KeyId id) const { return keys_.at(id); }
  const std::string& slot_key(SlotId id) const { return keys_.at(slots_.at(id).key); }
  SlotText slot_text(SlotId id) const { return {slot_key(id), slot(id).value}; }

  SlotId misc_slot() const { return kMiscSlot; }
  KeyId misc_key() const { return 0; }

  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::string>& keys() const { return keys_; }
  const std::vector<Slot>& slots() const { return slots_; }

  bool operator==(const SlotRegistry& other) const {
    return terms_ == other.terms_ && keys_ == other.keys_ && slots_ == other.slots_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::string> keys_;
  std::vector<Slot> slots_;
  std::unordered_map<std::string, TermId> term_ids_;
  std::unordered_map<std::string, KeyId> key_ids_;
  std::map<std::pair<KeyId, std::string>, SlotId, std::less<>> slot_ids_;
};

struct Query {
  std::vector<TermId> terms;
  std::size_t size() const { return terms.size(); }
  bool operator==(const Query&) const = default;
};

/// Slots harvested from one engaged product: at most one per key, always
/// including the miscellaneous slot. Stored sorted by slot id.
struct CandidateSlotSet {
  std::vector<SlotId> slots;

  std::size_t size() const { return slots.size(); }
  bool contains(SlotId id) const;
  /// Inserts keeping the sorted order; no-op when already present.
  void insert(SlotId id);
  bool operator==(const CandidateSlotSet&) const = default;
};

struct EngagementRecord {
  Query query;
  CandidateSlotSet candidates;
  bool operator==(const EngagementRecord&) const = default;
};

struct Corpus {
  SlotRegistry registry;
  std::vector<EngagementRecord> records;

  std::size_t total_words() const;
};

/// Builds a candidate set from (key, value) pairs: validates one slot per key,
/// interns unseen slots and adds the miscellaneous slot. Throws DataError.
CandidateSlotSet make_candidate_set(SlotRegistry& registry, const std::vector<SlotText>& slots);

/// Same as make_candidate_set but never interns: pairs unknown to the
/// registry are dropped.
CandidateSlotSet lookup_candidate_set(const SlotRegistry& registry, const std::vector<SlotText>& slots);

/// Maps tokens through the registry; unseen tokens become kUnknownTerm.
Query lookup_query(const SlotRegistry& registry, const std::vector<std::string>& tokens);

/// Reads engagement JSONL ({"query", "slots": [{"key","value"}]}), one record
/// per line. Blank lines are skipped. Throws DataError with the line number.
Corpus ingest_engagement(std::istream& in);

/// Writes the corpus back as engagement JSONL (miscellaneous slot omitted).
void write_engagement(const Corpus& corpus, std::ostream& out);

/// Throws DataError if any record breaks the corpus invariants.
void validate_corpus(const Corpus& corpus);

/// Frequency filter. Records containing a term seen fewer than
/// `min_word_freq` times are dropped (repeated until no such term remains),
/// then non-miscellaneous slots present in fewer than `min_slot_freq` records
/// are removed from candidate sets. Ids are re-densified preserving order.
Corpus filter_corpus(const Corpus& corpus, Count min_word_freq, Count min_slot_freq);

/// One manually annotated query: a slot key per token.
struct GoldAnnotation {
  std::string query;
  std::vector<std::string> tokens;
  std::vector<std::string> keys;
};

/// Reads annotations JSONL ({"query", "keys": [...]}). Throws DataError on a
/// token/key length mismatch, naming the query.
std::vector<GoldAnnotation> load_gold(std::istream& in);

}  // namespace slotfill
