#include "slotfill/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <set>

#include "jsonl.hpp"
#include "slotfill/error.hpp"

namespace slotfill {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SlotRegistry::SlotRegistry() {
  intern_slot(kMiscKey, kMiscKey);
}

TermId SlotRegistry::intern_term(std::string_view term) {
  auto [it, inserted] = term_ids_.try_emplace(std::string(term), static_cast<TermId>(terms_.size()));
  if (inserted) terms_.emplace_back(term);
  return it->second;
}

KeyId SlotRegistry::intern_key(std::string_view key) {
  auto [it, inserted] = key_ids_.try_emplace(std::string(key), static_cast<KeyId>(keys_.size()));
  if (inserted) keys_.emplace_back(key);
  return it->second;
}

SlotId SlotRegistry::intern_slot(std::string_view key, std::string_view value) {
  const KeyId key_id = intern_key(key);
  auto [it, inserted] = slot_ids_.try_emplace({key_id, std::string(value)}, static_cast<SlotId>(slots_.size()));
  if (inserted) slots_.push_back({key_id, std::string(value)});
  return it->second;
}

std::optional<TermId> SlotRegistry::find_term(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<KeyId> SlotRegistry::find_key(std::string_view key) const {
  auto it = key_ids_.find(std::string(key));
  if (it == key_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<SlotId> SlotRegistry::find_slot(std::string_view key, std::string_view value) const {
  const auto key_id = find_key(key);
  if (!key_id) return std::nullopt;
  auto it = slot_ids_.find(std::pair<KeyId, std::string>{*key_id, std::string(value)});
  if (it == slot_ids_.end()) return std::nullopt;
  return it->second;
}

TermId SlotRegistry::lookup_term(std::string_view term) const {
  return find_term(term).value_or(kUnknownTerm);
}

bool CandidateSlotSet::contains(SlotId id) const {
  return std::binary_search(slots.begin(), slots.end(), id);
}

void CandidateSlotSet::insert(SlotId id) {
  auto it = std::lower_bound(slots.begin(), slots.end(), id);
  if (it == slots.end() || *it != id) slots.insert(it, id);
}

std::size_t Corpus::total_words() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.query.size();
  return n;
}

namespace {

void check_slot_keys(const std::vector<SlotText>& slots) {
  std::set<std::string_view> seen;
  for (const auto& s : slots) {
    if (s.key == kMiscKey) {
      throw DataError("slot key '" + std::string(kMiscKey) + "' is reserved");
    }
    if (!seen.insert(s.key).second) {
      throw DataError("duplicate slot key '" + s.key + "' in one candidate set");
    }
  }
}

}  // namespace

CandidateSlotSet make_candidate_set(SlotRegistry& registry, const std::vector<SlotText>& slots) {
  check_slot_keys(slots);
  CandidateSlotSet set;
  set.insert(registry.misc_slot());
  for (const auto& s : slots) set.insert(registry.intern_slot(s.key, s.value));
  return set;
}

CandidateSlotSet lookup_candidate_set(const SlotRegistry& registry, const std::vector<SlotText>& slots) {
  check_slot_keys(slots);
  CandidateSlotSet set;
  set.insert(registry.misc_slot());
  for (const auto& s : slots) {
    if (auto id = registry.find_slot(s.key, s.value)) set.insert(*id);
  }
  return set;
}

Query lookup_query(const SlotRegistry& registry, const std::vector<std::string>& tokens) {
  Query q;
  q.terms.reserve(tokens.size());
  for (const auto& t : tokens) q.terms.push_back(registry.lookup_term(t));
  return q;
}

Corpus ingest_engagement(std::istream& in) {
  Corpus corpus;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    const auto text = detail::require_string(obj, "query", line_no);
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw DataError("line " + std::to_string(line_no) + ": empty query");
    auto slots_it = obj.find("slots");
    if (slots_it == obj.end()) {
      throw DataError("line " + std::to_string(line_no) + ": missing field 'slots'");
    }
    const auto slots = detail::parse_slot_list(*slots_it, line_no);

    EngagementRecord record;
    for (const auto& t : tokens) record.query.terms.push_back(corpus.registry.intern_term(t));
    try {
      record.candidates = make_candidate_set(corpus.registry, slots);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.records.push_back(std::move(record));
  });
  return corpus;
}

void write_engagement(const Corpus& corpus, std::ostream& out) {
  const auto& reg = corpus.registry;
  for (const auto& record : corpus.records) {
    std::string text;
    for (TermId t : record.query.terms) {
      if (!text.empty()) text.push_back(' ');
      text += reg.term(t);
    }
    nlohmann::json slots = nlohmann::json::array();
    for (SlotId s : record.candidates.slots) {
      if (s == reg.misc_slot()) continue;
      slots.push_back(detail::slot_json(reg.slot_text(s)));
    }
    out << nlohmann::json{{"query", text}, {"slots", slots}}.dump() << '\n';
  }
}

void validate_corpus(const Corpus& corpus) {
  const auto& reg = corpus.registry;
  for (std::size_t r = 0; r < corpus.records.size(); ++r) {
    const auto& rec = corpus.records[r];
    const std::string where = "record " + std::to_string(r) + ": ";
    if (rec.query.terms.empty()) throw DataError(where + "empty query");
    for (TermId t : rec.query.terms) {
      if (t >= reg.num_terms()) throw DataError(where + "term id out of range");
    }
    if (!rec.candidates.contains(reg.misc_slot())) {
      throw DataError(where + "candidate set lacks the miscellaneous slot");
    }
    if (!std::is_sorted(rec.candidates.slots.begin(), rec.candidates.slots.end())) {
      throw DataError(where + "candidate set not sorted");
    }
    std::set<KeyId> keys;
    for (SlotId s : rec.candidates.slots) {
      if (s >= reg.num_slots()) throw DataError(where + "slot id out of range");
      if (!keys.insert(reg.slot(s).key).second) {
        throw DataError(where + "duplicate slot key '" + reg.slot_key(s) + "'");
      }
    }
  }
}

Corpus filter_corpus(const Corpus& corpus, Count min_word_freq, Count min_slot_freq) {
  if (min_word_freq < 1 || min_slot_freq < 1) {
    throw UsageError("filter thresholds must be >= 1");
  }
  const auto& reg = corpus.registry;

  std::vector<const EngagementRecord*> kept;
  kept.reserve(corpus.records.size());
  for (const auto& r : corpus.records) kept.push_back(&r);

  // Dropping a record lowers the frequency of its other terms, so iterate to
  // a fixed point; this makes the filter idempotent.
  for (;;) {
    std::vector<Count> term_freq(reg.num_terms(), 0);
    for (const auto* r : kept) {
      for (TermId t : r->query.terms) ++term_freq[t];
    }
    const auto before = kept.size();
    std::erase_if(kept, [&](const EngagementRecord* r) {
      return std::any_of(r->query.terms.begin(), r->query.terms.end(),
                         [&](TermId t) { return term_freq[t] < min_word_freq; });
    });
    if (kept.size() == before) break;
  }
  if (kept.empty()) throw DataError("empty corpus after filtering");

  std::vector<Count> slot_freq(reg.num_slots(), 0);
  for (const auto* r : kept) {
    for (SlotId s : r->candidates.slots) ++slot_freq[s];
  }
  auto slot_survives = [&](SlotId s) {
    return s == reg.misc_slot() || slot_freq[s] >= min_slot_freq;
  };

  // Re-densify in old-id order.
  std::vector<bool> term_used(reg.num_terms(), false);
  for (const auto* r : kept) {
    for (TermId t : r->query.terms) term_used[t] = true;
  }
  Corpus out;
  std::vector<TermId> term_map(reg.num_terms(), kUnknownTerm);
  for (TermId t = 0; t < reg.num_terms(); ++t) {
    if (term_used[t]) term_map[t] = out.registry.intern_term(reg.term(t));
  }
  std::vector<SlotId> slot_map(reg.num_slots(), 0);
  for (SlotId s = 0; s < reg.num_slots(); ++s) {
    if (slot_freq[s] > 0 && slot_survives(s)) {
      slot_map[s] = out.registry.intern_slot(reg.slot_key(s), reg.slot(s).value);
    }
  }
  out.records.reserve(kept.size());
  for (const auto* r : kept) {
    EngagementRecord rec;
    rec.query.terms.reserve(r->query.size());
    for (TermId t : r->query.terms) rec.query.terms.push_back(term_map[t]);
    rec.candidates.insert(out.registry.misc_slot());
    for (SlotId s : r->candidates.slots) {
      if (slot_survives(s)) rec.candidates.insert(slot_map[s]);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<GoldAnnotation> load_gold(std::istream& in) {
  std::vector<GoldAnnotation> gold;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    GoldAnnotation g;
    g.query = detail::require_string(obj, "query", line_no);
    g.tokens = tokenize(g.query);
    auto keys_it = obj.find("keys");
    if (keys_it == obj.end() || !keys_it->is_array()) {
      throw DataError("line " + std::to_string(line_no) + ": missing array field 'keys'");
    }
    for (const auto& k : *keys_it) {
      if (!k.is_string()) throw DataError("line " + std::to_string(line_no) + ": keys must be strings");
      g.keys.push_back(k.get<std::string>());
    }
    if (g.keys.size() != g.tokens.size()) {
      throw DataError("line " + std::to_string(line_no) + ": query '" + g.query + "' has " +
                      std::to_string(g.tokens.size()) + " tokens but " +
                      std::to_string(g.keys.size()) + " keys");
    }
    gold.push_back(std::move(g));
  });
  return gold;
}

}  // namespace slotfill
