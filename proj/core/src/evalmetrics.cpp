#include "slotfill/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <set>
#include <unordered_map>

#include "jsonl.hpp"
#include "slotfill/error.hpp"

namespace slotfill {

void write_tags(const std::vector<TaggedQuery>& tags, std::ostream& out) {
  for (const auto& t : tags) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : t.slots) slots.push_back(detail::slot_json(s));
    out << nlohmann::json{{"query", t.query}, {"keys", t.keys}, {"slots", slots}}.dump() << '\n';
  }
}

std::vector<TaggedQuery> load_tags(std::istream& in) {
  std::vector<TaggedQuery> tags;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    TaggedQuery t;
    t.query = detail::require_string(obj, "query", line_no);
    auto keys = obj.find("keys");
    if (keys == obj.end() || !keys->is_array()) {
      throw DataError("line " + std::to_string(line_no) + ": missing array field 'keys'");
    }
    for (const auto& k : *keys) {
      if (!k.is_string()) throw DataError("line " + std::to_string(line_no) + ": keys must be strings");
      t.keys.push_back(k.get<std::string>());
    }
    if (auto slots = obj.find("slots"); slots != obj.end()) t.slots = detail::parse_slot_list(*slots, line_no);
    tags.push_back(std::move(t));
  });
  return tags;
}

std::string normalize_query(const std::string& text) {
  std::string out;
  for (const auto& tok : tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

TaggingReport tagging_metrics(const std::vector<TaggedQuery>& predictions,
                              const std::vector<GoldAnnotation>& gold) {
  std::unordered_map<std::string, std::deque<const TaggedQuery*>> by_text;
  for (const auto& p : predictions) by_text[normalize_query(p.query)].push_back(&p);

  std::set<std::string> gold_keys;
  TaggingReport report;
  std::size_t correct_words = 0;
  double q_acc_sum = 0.0;
  std::map<std::size_t, std::pair<std::size_t, double>> length_sums;

  for (const auto& g : gold) {
    auto it = by_text.find(normalize_query(g.query));
    if (it == by_text.end() || it->second.empty()) continue;
    const TaggedQuery& p = *it->second.front();
    it->second.pop_front();
    if (p.keys.size() != g.keys.size()) {
      throw DataError("query '" + g.query + "': prediction has " + std::to_string(p.keys.size()) +
                      " keys, gold has " + std::to_string(g.keys.size()));
    }
    if (g.keys.empty()) continue;

    std::size_t correct = 0;
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
      gold_keys.insert(g.keys[i]);
      auto& gk = report.per_key[g.keys[i]];
      ++gk.gold;
      auto& pk = report.per_key[p.keys[i]];
      ++pk.predicted;
      if (p.keys[i] == g.keys[i]) {
        ++correct;
        ++gk.correct;
      }
    }
    const double frac = static_cast<double>(correct) / static_cast<double>(g.keys.size());
    ++report.queries;
    report.words += g.keys.size();
    correct_words += correct;
    q_acc_sum += frac;
    auto& bucket = length_sums[g.keys.size()];
    ++bucket.first;
    bucket.second += frac;
  }
  if (report.queries == 0) throw DataError("no predicted query matches a gold annotation");

  report.accuracy = static_cast<double>(correct_words) / static_cast<double>(report.words);
  report.q_accuracy = q_acc_sum / static_cast<double>(report.queries);

  // Keys that were only ever predicted do not take part in the macro average.
  std::erase_if(report.per_key, [&](const auto& kv) { return !gold_keys.contains(kv.first); });
  for (auto& [key, s] : report.per_key) {
    s.precision = s.predicted ? static_cast<double>(s.correct) / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.gold ? static_cast<double>(s.correct) / static_cast<double>(s.gold) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    report.avg_prec += s.precision;
    report.avg_rec += s.recall;
    report.avg_f1 += s.f1;
  }
  const auto n_keys = static_cast<double>(report.per_key.size());
  report.avg_prec /= n_keys;
  report.avg_rec /= n_keys;
  report.avg_f1 /= n_keys;

  for (const auto& [len, sums] : length_sums) {
    report.by_length[len] = {sums.first, sums.second / static_cast<double>(sums.first)};
  }
  return report;
}

nlohmann::json to_json(const TaggingReport& report) {
  nlohmann::json per_key = nlohmann::json::object();
  for (const auto& [key, s] : report.per_key) {
    per_key[key] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                    {"predicted", s.predicted}, {"gold", s.gold},     {"correct", s.correct}};
  }
  nlohmann::json by_length = nlohmann::json::array();
  for (const auto& [len, b] : report.by_length) {
    by_length.push_back({{"length", len}, {"n_queries", b.queries}, {"q_accuracy", b.q_accuracy}});
  }
  return {{"queries", report.queries},   {"words", report.words},       {"accuracy", report.accuracy},
          {"q_accuracy", report.q_accuracy}, {"avg_prec", report.avg_prec}, {"avg_rec", report.avg_rec},
          {"avg_f1", report.avg_f1},     {"per_key", per_key},          {"by_length", by_length}};
}

void write_length_csv(const TaggingReport& report, std::ostream& out) {
  out << "length,n_queries,q_accuracy\n";
  for (const auto& [len, b] : report.by_length) {
    out << len << ',' << b.queries << ',' << b.q_accuracy << '\n';
  }
}

Judgments load_judgments(std::istream& in) {
  Judgments j;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    const auto query = normalize_query(detail::require_string(obj, "query", line_no));
    const auto product = detail::require_string(obj, "product_id", line_no);
    auto it = obj.find("purchases");
    if (it == obj.end() || !it->is_number_integer() || it->get<Count>() < 0) {
      throw DataError("line " + std::to_string(line_no) + ": purchases must be a non-negative integer");
    }
    j[query][product] += it->get<Count>();
  });
  return j;
}

namespace {

const std::map<std::string, Count>* judged_for(const Judgments& judgments, const std::string& query) {
  auto it = judgments.find(normalize_query(query));
  return it == judgments.end() ? nullptr : &it->second;
}

}  // namespace

double mrr(const std::vector<RankedList>& rankings, const Judgments& judgments) {
  if (rankings.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rankings) {
    const auto* judged = judged_for(judgments, r.query);
    if (!judged) continue;
    Count best = 0;
    for (const auto& [_, p] : *judged) best = std::max(best, p);
    if (best <= 0) continue;
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      auto it = judged->find(r.items[i].product_id);
      if (it != judged->end() && it->second == best) {
        total += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(rankings.size());
}

double ndcg_single(const std::vector<double>& ranked_scores, const std::vector<double>& ranked_gains,
                   std::vector<double> all_gains, std::size_t k) {
  if (k < 1) throw UsageError("NDCG cutoff k must be >= 1");
  std::sort(all_gains.begin(), all_gains.end(), std::greater<>());
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(k, all_gains.size()); ++r) {
    ideal += all_gains[r] / std::log2(static_cast<double>(r) + 2.0);
  }
  if (ideal <= 0.0) return 0.0;

  double dcg = 0.0;
  const std::size_t n = ranked_scores.size();
  for (std::size_t start = 0; start < n && start < k;) {
    std::size_t end = start + 1;
    while (end < n && ranked_scores[end] == ranked_scores[start]) ++end;
    double group_gain = 0.0;
    for (std::size_t r = start; r < end; ++r) group_gain += ranked_gains[r];
    const double avg = group_gain / static_cast<double>(end - start);
    for (std::size_t r = start; r < std::min(end, k); ++r) {
      dcg += avg / std::log2(static_cast<double>(r) + 2.0);
    }
    start = end;
  }
  return dcg / ideal;
}

double ndcg_at_k(const std::vector<RankedList>& rankings, const Judgments& judgments, std::size_t k) {
  if (k < 1) throw UsageError("NDCG cutoff k must be >= 1");
  if (rankings.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rankings) {
    const auto* judged = judged_for(judgments, r.query);
    if (!judged) continue;
    std::vector<double> scores, gains, pool;
    for (const auto& item : r.items) {
      scores.push_back(item.score);
      auto it = judged->find(item.product_id);
      gains.push_back(it == judged->end() ? 0.0 : static_cast<double>(it->second));
    }
    for (const auto& [_, p] : *judged) pool.push_back(static_cast<double>(p));
    total += ndcg_single(scores, gains, std::move(pool), k);
  }
  return total / static_cast<double>(rankings.size());
}

RetrievalReport retrieval_metrics(const std::vector<RankedList>& rankings, const Judgments& judgments,
                                  std::size_t k) {
  return {rankings.size(), k, mrr(rankings, judgments), ndcg_at_k(rankings, judgments, k)};
}

nlohmann::json to_json(const RetrievalReport& report) {
  return {{"queries", report.queries}, {"k", report.k}, {"mrr", report.mrr}, {"ndcg_at_k", report.ndcg_at_k}};
}

}  // namespace slotfill
