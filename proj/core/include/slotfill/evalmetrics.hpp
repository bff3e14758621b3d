#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slotfill/corpus.hpp"
#include "slotfill/ranking.hpp"

namespace slotfill {

/// A model's tagging of one query, at slot-key granularity (plus the slots,
/// kept for output).
struct TaggedQuery {
  std::string query;
  std::vector<std::string> keys;
  std::vector<SlotText> slots;
};

void write_tags(const std::vector<TaggedQuery>& tags, std::ostream& out);
std::vector<TaggedQuery> load_tags(std::istream& in);

struct KeyScores {
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LengthBucket {
  std::size_t queries = 0;
  double q_accuracy = 0.0;
};

struct TaggingReport {
  std::size_t queries = 0;
  std::size_t words = 0;
  double accuracy = 0.0;
  double q_accuracy = 0.0;
  std::map<std::string, KeyScores> per_key;  // keys present in gold
  double avg_prec = 0.0;
  double avg_rec = 0.0;
  double avg_f1 = 0.0;  // mean of per-key F1, not F1 of the means
  std::map<std::size_t, LengthBucket> by_length;
};

/// Pairs predictions with gold annotations by normalized query text (repeated
/// texts pair up in order of appearance) and scores them. Throws DataError if
/// no query pairs up or a pair disagrees on length.
TaggingReport tagging_metrics(const std::vector<TaggedQuery>& predictions,
                              const std::vector<GoldAnnotation>& gold);

nlohmann::json to_json(const TaggingReport& report);
/// CSV rows: length,n_queries,q_accuracy (with a header line).
void write_length_csv(const TaggingReport& report, std::ostream& out);

/// Purchases per (normalized query, product id).
using Judgments = std::map<std::string, std::map<std::string, Count>>;

/// Reads judgments JSONL ({"query", "product_id", "purchases"}); repeated
/// pairs are summed.
Judgments load_judgments(std::istream& in);

/// Lowercased tokens joined by single spaces.
std::string normalize_query(const std::string& text);

/// Mean reciprocal rank of the first most-purchased product. Queries without
/// a judged product with positive purchases contribute 0.
double mrr(const std::vector<RankedList>& rankings, const Judgments& judgments);

/// Mean NDCG@k with linear gain = purchases and discount 1/log2(rank + 1).
/// Equal-score runs in a ranking receive the average gain of the run at each
/// of its positions. Queries with zero ideal DCG contribute 0.
double ndcg_at_k(const std::vector<RankedList>& rankings, const Judgments& judgments, std::size_t k);

/// NDCG@k of a single ranking given per-item gains and the full gain pool.
double ndcg_single(const std::vector<double>& ranked_scores, const std::vector<double>& ranked_gains,
                   std::vector<double> all_gains, std::size_t k);

struct RetrievalReport {
  std::size_t queries = 0;
  std::size_t k = 10;
  double mrr = 0.0;
  double ndcg_at_k = 0.0;
};

RetrievalReport retrieval_metrics(const std::vector<RankedList>& rankings, const Judgments& judgments,
                                  std::size_t k);
nlohmann::json to_json(const RetrievalReport& report);

}  // namespace slotfill
