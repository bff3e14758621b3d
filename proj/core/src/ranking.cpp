#include "slotfill/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_set>

#include "jsonl.hpp"
#include "slotfill/error.hpp"

namespace slotfill {

std::vector<ProductDoc> load_catalog(std::istream& in) {
  std::vector<ProductDoc> products;
  std::unordered_set<std::string> ids;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    ProductDoc doc;
    doc.product_id = detail::require_string(obj, "product_id", line_no);
    if (!ids.insert(doc.product_id).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate product_id '" + doc.product_id + "'");
    }
    auto it = obj.find("slots");
    if (it == obj.end()) throw DataError("line " + std::to_string(line_no) + ": missing field 'slots'");
    doc.slots = detail::parse_slot_list(*it, line_no);
    std::set<std::string> keys;
    for (const auto& s : doc.slots) {
      if (!keys.insert(s.key).second) {
        throw DataError("line " + std::to_string(line_no) + ": duplicate slot key '" + s.key + "'");
      }
      for (auto& tok : tokenize(s.value)) doc.text.push_back(std::move(tok));
    }
    products.push_back(std::move(doc));
  });
  return products;
}

CatalogIndex::CatalogIndex(std::vector<ProductDoc> products) : products_(std::move(products)) {
  tf_.resize(products_.size());
  double total_len = 0.0;
  for (std::size_t d = 0; d < products_.size(); ++d) {
    for (const auto& t : products_[d].text) ++tf_[d][t];
    for (const auto& [term, _] : tf_[d]) ++df_[term];
    total_len += static_cast<double>(products_[d].text.size());
  }
  if (!products_.empty()) avg_length_ = total_len / static_cast<double>(products_.size());
}

std::size_t CatalogIndex::document_frequency(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

std::size_t CatalogIndex::term_frequency(std::size_t doc, const std::string& term) const {
  auto it = tf_[doc].find(term);
  return it == tf_[doc].end() ? 0 : it->second;
}

int slot_match_score(const std::vector<SlotText>& predicted, const ProductDoc& product) {
  int score = 0;
  for (const auto& p : predicted) {
    if (p.key == kMiscKey) continue;
    if (std::find(product.slots.begin(), product.slots.end(), p) != product.slots.end()) ++score;
  }
  return score;
}

double bm25_score(const std::vector<std::string>& query_tokens, const CatalogIndex& index,
                  std::size_t doc, const Bm25Params& params) {
  if (index.size() == 0) throw DataError("BM25 over an empty catalog");
  const auto n = static_cast<double>(index.size());
  const double avgdl = index.average_length();
  const double norm_len = avgdl > 0.0 ? index.doc_length(doc) / avgdl : 0.0;
  std::set<std::string> distinct(query_tokens.begin(), query_tokens.end());
  double score = 0.0;
  for (const auto& term : distinct) {
    const auto tf = static_cast<double>(index.term_frequency(doc, term));
    if (tf == 0.0) continue;
    const auto df = static_cast<double>(index.document_frequency(term));
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    score += idf * (tf * (params.k1 + 1.0)) / (tf + params.k1 * (1.0 - params.b + params.b * norm_len));
  }
  return score;
}

RankMode parse_rank_mode(std::string_view name) {
  if (name == "slots") return RankMode::kSlots;
  if (name == "bm25") return RankMode::kBm25;
  if (name == "fused") return RankMode::kFused;
  throw UsageError("unknown ranking mode '" + std::string(name) + "' (expected slots, bm25 or fused)");
}

RankedList rank_products(const std::string& query, const std::vector<SlotText>& predicted,
                         const CatalogIndex& index, RankMode mode, const Bm25Params& params) {
  if (index.size() == 0) throw DataError("cannot rank against an empty catalog");
  const auto tokens = tokenize(query);
  const std::size_t n = index.size();

  std::vector<double> lexical(n, 0.0);
  if (mode != RankMode::kSlots) {
    for (std::size_t d = 0; d < n; ++d) lexical[d] = bm25_score(tokens, index, d, params);
  }
  if (mode == RankMode::kFused) {
    const auto [lo, hi] = std::minmax_element(lexical.begin(), lexical.end());
    const double low = *lo, range = *hi - *lo;
    for (double& x : lexical) x = range > 0.0 ? (x - low) / range : 0.0;
  }

  RankedList out;
  out.query = query;
  out.items.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    double score = lexical[d];
    if (mode != RankMode::kBm25) score += slot_match_score(predicted, index.product(d));
    out.items.push_back({index.product(d).product_id, score});
  }
  std::sort(out.items.begin(), out.items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.product_id < b.product_id;
  });
  return out;
}

void write_rankings(const std::vector<RankedList>& rankings, std::ostream& out) {
  for (const auto& r : rankings) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : r.items) {
      items.push_back({{"product_id", item.product_id}, {"score", item.score}});
    }
    out << nlohmann::json{{"query", r.query}, {"ranking", items}}.dump() << '\n';
  }
}

std::vector<RankedList> load_rankings(std::istream& in) {
  std::vector<RankedList> out;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    RankedList list;
    list.query = detail::require_string(obj, "query", line_no);
    auto it = obj.find("ranking");
    if (it == obj.end() || !it->is_array()) {
      throw DataError("line " + std::to_string(line_no) + ": missing array field 'ranking'");
    }
    for (const auto& item : *it) {
      auto score = item.find("score");
      if (!item.is_object() || score == item.end() || !score->is_number()) {
        throw DataError("line " + std::to_string(line_no) + ": ranking entries need product_id and score");
      }
      list.items.push_back({detail::require_string(item, "product_id", line_no), score->get<double>()});
    }
    out.push_back(std::move(list));
  });
  return out;
}

}  // namespace slotfill
