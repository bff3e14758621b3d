#include <doctest.h>

#include <sstream>

#include "../support/fixtures.hpp"
#include "slotfill/corpus.hpp"
#include "slotfill/error.hpp"

using namespace slotfill;
using slotfill::testing::corpus_from_jsonl;

namespace {

const char* kThreeRecords =
    R"({"query":"red shoes","slots":[{"key":"color","value":"red"},{"key":"product-type","value":"shoes"}]})"
    "\n"
    R"({"query":"blue shoes","slots":[{"key":"color","value":"blue"},{"key":"product-type","value":"shoes"}]})"
    "\n"
    R"({"query":"blue shirt","slots":[{"key":"color","value":"blue"},{"key":"product-type","value":"shirt"}]})"
    "\n";

}  // namespace

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(tokenize("  Nike\tMen  RUNNING\nshoes ") == std::vector<std::string>{"nike", "men", "running", "shoes"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("ingest the nike example") {
  auto c = corpus_from_jsonl(
      R"({"query":"nike men running shoes","slots":[{"key":"brand","value":"nike inc."},{"key":"product-type","value":"athletic shoes"},{"key":"gender","value":"mens"}]})");
  REQUIRE(c.records.size() == 1);
  CHECK(c.records[0].query.size() == 4);
  CHECK(c.records[0].candidates.size() == 4);
  CHECK(c.records[0].candidates.contains(kMiscSlot));
  CHECK(c.registry.slot_key(kMiscSlot) == "miscellaneous");
  CHECK(c.registry.num_keys() == 4);
  validate_corpus(c);
}

TEST_CASE("empty stream gives only the miscellaneous slot") {
  auto c = corpus_from_jsonl("");
  CHECK(c.records.empty());
  CHECK(c.registry.num_slots() == 1);
  CHECK(c.registry.num_terms() == 0);
  CHECK(c.registry.slot_text(kMiscSlot) == SlotText{"miscellaneous", "miscellaneous"});
}

TEST_CASE("identical queries stay separate records sharing term ids") {
  auto c = corpus_from_jsonl(
      R"({"query":"tide pods","slots":[{"key":"brand","value":"tide"}]})"
      "\n"
      R"({"query":"tide pods","slots":[{"key":"brand","value":"tide"},{"key":"color","value":"blue"}]})");
  REQUIRE(c.records.size() == 2);
  CHECK(c.records[0].query == c.records[1].query);
  CHECK(c.records[0].candidates != c.records[1].candidates);
}

TEST_CASE("ingest errors") {
  CHECK_THROWS_WITH_AS(corpus_from_jsonl("{\"query\":\"a\",\"slots\":[]}\n{oops"), doctest::Contains("line 2"),
                       DataError);
  CHECK_THROWS_WITH_AS(
      corpus_from_jsonl(
          R"({"query":"a","slots":[{"key":"brand","value":"x"},{"key":"brand","value":"y"}]})"),
      doctest::Contains("brand"), DataError);
  CHECK_THROWS_AS(corpus_from_jsonl(R"({"query":"a","slots":[{"key":"miscellaneous","value":"x"}]})"),
                  DataError);
  CHECK_THROWS_AS(corpus_from_jsonl(R"({"query":"   ","slots":[]})"), DataError);
  CHECK_THROWS_AS(corpus_from_jsonl(R"({"slots":[]})"), DataError);
  CHECK_THROWS_AS(corpus_from_jsonl(R"({"query":"a"})"), DataError);
}

TEST_CASE("serialize then ingest round-trips") {
  auto c = corpus_from_jsonl(kThreeRecords);
  std::ostringstream out;
  write_engagement(c, out);
  auto again = corpus_from_jsonl(out.str());
  CHECK(again.registry == c.registry);
  CHECK(again.records == c.records);
}

TEST_CASE("vacuous filter keeps everything") {
  auto c = corpus_from_jsonl(kThreeRecords);
  auto f = filter_corpus(c, 1, 1);
  CHECK(f.records.size() == c.records.size());
  CHECK(f.registry == c.registry);
  CHECK(f.records == c.records);
}

TEST_CASE("rare words drop their records") {
  auto c = corpus_from_jsonl(
      R"({"query":"red shoes","slots":[]})" "\n"
      R"({"query":"shoes red","slots":[]})" "\n"
      R"({"query":"xyz shoes","slots":[]})" "\n");
  auto f = filter_corpus(c, 2, 1);
  CHECK(f.records.size() == 2);
  CHECK(f.registry.num_terms() == 2);
  for (const auto& r : f.records) {
    for (auto t : r.query.terms) CHECK(f.registry.term(t) != "xyz");
  }
  CHECK_FALSE(f.registry.find_term("xyz"));
}

TEST_CASE("rare slots leave candidate sets but records stay") {
  auto c = corpus_from_jsonl(kThreeRecords);
  auto f = filter_corpus(c, 1, 2);
  CHECK(f.records.size() == 3);
  CHECK_FALSE(f.registry.find_slot("color", "red"));
  CHECK_FALSE(f.registry.find_slot("product-type", "shirt"));
  CHECK(f.registry.find_slot("color", "blue"));
  CHECK(f.records[0].candidates.size() == 2);  // misc + shoes
  validate_corpus(f);
}

TEST_CASE("dropping a record can cascade") {
  // "red" and "shirt" are singletons; removing those records leaves "blue"
  // once, which then goes too.
  auto c = corpus_from_jsonl(kThreeRecords);
  CHECK_THROWS_AS(filter_corpus(c, 2, 1), DataError);
}

TEST_CASE("filtering everything is an error") {
  auto c = corpus_from_jsonl(kThreeRecords);
  CHECK_THROWS_WITH_AS(filter_corpus(c, 100, 1), "empty corpus after filtering", DataError);
  CHECK_THROWS_AS(filter_corpus(c, 0, 1), UsageError);
}

TEST_CASE("filter is idempotent and monotone on random corpora") {
  RandomSource rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = slotfill::testing::random_toy_corpus(rng, 30, 12, 6, 4);
    const Count w = 1 + static_cast<Count>(rng.uniform_index(4));
    const Count s = 1 + static_cast<Count>(rng.uniform_index(4));
    std::size_t kept = 0;
    try {
      auto f = filter_corpus(c, w, s);
      kept = f.records.size();
      validate_corpus(f);
      auto g = filter_corpus(f, w, s);
      CHECK(g.registry == f.registry);
      CHECK(g.records == f.records);
    } catch (const DataError&) {
      kept = 0;
    }
    std::size_t kept_higher = 0;
    try {
      kept_higher = filter_corpus(c, w + 1, s + 1).records.size();
    } catch (const DataError&) {
    }
    CHECK(kept_higher <= kept);
  }
}

TEST_CASE("every ingested candidate set satisfies the invariants") {
  RandomSource rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = slotfill::testing::random_toy_corpus(rng, 10);
    std::ostringstream out;
    write_engagement(c, out);
    auto again = corpus_from_jsonl(out.str());
    validate_corpus(again);
    for (const auto& r : again.records) CHECK(r.candidates.contains(kMiscSlot));
  }
}

TEST_CASE("load_gold") {
  std::istringstream in(
      R"({"query":"nike men black running shoes","keys":["brand","gender","color","product-type","product-type"]})"
      "\n"
      R"({"query":"shoes","keys":["product-type"]})");
  auto gold = load_gold(in);
  REQUIRE(gold.size() == 2);
  CHECK(gold[0].keys.size() == 5);
  CHECK(gold[0].tokens.size() == 5);
  CHECK(gold[1].keys.size() == 1);

  std::istringstream bad(R"({"query":"a b","keys":["brand"]})");
  CHECK_THROWS_WITH_AS(load_gold(bad), doctest::Contains("a b"), DataError);
}

TEST_CASE("lookup helpers never intern") {
  auto c = corpus_from_jsonl(kThreeRecords);
  const auto before = c.registry;
  auto q = lookup_query(c.registry, tokenize("red unknownword"));
  CHECK(q.terms[1] == kUnknownTerm);
  auto set = lookup_candidate_set(c.registry, {{"color", "red"}, {"brand", "acme"}});
  CHECK(set.size() == 2);
  CHECK(c.registry == before);
}
