#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "slotfill/corpus.hpp"

namespace slotfill {

struct ProductDoc {
  std::string product_id;
  std::vector<SlotText> slots;
  std::vector<std::string> text;  // tokenized slot values, in slot order
};

/// Reads catalog JSONL ({"product_id", "slots": [{"key","value"}]}). Product
/// ids must be unique and each product carries at most one slot per key.
std::vector<ProductDoc> load_catalog(std::istream& in);

/// Linear-scan BM25 statistics over a product catalog.
class CatalogIndex {
 public:
  explicit CatalogIndex(std::vector<ProductDoc> products);

  std::size_t size() const { return products_.size(); }
  const ProductDoc& product(std::size_t i) const { return products_[i]; }
  std::size_t document_frequency(const std::string& term) const;
  std::size_t term_frequency(std::size_t doc, const std::string& term) const;
  double doc_length(std::size_t doc) const { return static_cast<double>(products_[doc].text.size()); }
  double average_length() const { return avg_length_; }

 private:
  std::vector<ProductDoc> products_;
  std::vector<std::unordered_map<std::string, std::size_t>> tf_;
  std::unordered_map<std::string, std::size_t> df_;
  double avg_length_ = 0.0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Number of predicted (key, value) slots that the product carries.
/// Miscellaneous predictions never match.
int slot_match_score(const std::vector<SlotText>& predicted, const ProductDoc& product);

/// Okapi BM25 over the distinct query terms, with
/// idf = ln((N - df + 0.5) / (df + 0.5) + 1). Throws DataError on an empty catalog.
double bm25_score(const std::vector<std::string>& query_tokens, const CatalogIndex& index,
                  std::size_t doc, const Bm25Params& params);

enum class RankMode { kSlots, kBm25, kFused };

/// "slots" | "bm25" | "fused"; anything else is a UsageError.
RankMode parse_rank_mode(std::string_view name);

struct RankedItem {
  std::string product_id;
  double score = 0.0;
};

struct RankedList {
  std::string query;
  std::vector<RankedItem> items;  // score descending, then product id ascending
};

/// Scores every product. kFused adds the per-query min-max normalized BM25
/// (0 when BM25 is constant over the catalog) to the slot-match count.
RankedList rank_products(const std::string& query, const std::vector<SlotText>& predicted,
                         const CatalogIndex& index, RankMode mode, const Bm25Params& params = {});

void write_rankings(const std::vector<RankedList>& rankings, std::ostream& out);
std::vector<RankedList> load_rankings(std::istream& in);

}  // namespace slotfill
