#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "slotfill/corpus.hpp"
#include "slotfill/error.hpp"
#include "slotfill/evalmetrics.hpp"
#include "slotfill/ranking.hpp"
#include "slotfill/synthgen.hpp"

using namespace slotfill;

namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.n_keys = 3;
  c.vocab_size = 30;
  c.queries = 300;
  return c;
}

Corpus engagement_of(const SynthOutput& out) {
  std::istringstream in(out.engagement);
  return ingest_engagement(in);
}

std::vector<GoldAnnotation> gold_of(const SynthOutput& out) {
  std::istringstream in(out.annotations);
  return load_gold(in);
}

}  // namespace

TEST_CASE("same seed gives identical output") {
  auto a = generate(small_config());
  auto b = generate(small_config());
  CHECK(a.engagement == b.engagement);
  CHECK(a.annotations == b.annotations);
  CHECK(a.catalog == b.catalog);
  CHECK(a.judgments == b.judgments);
  CHECK(a.planted == b.planted);
  auto other = small_config();
  other.seed = 43;
  CHECK(generate(other).engagement != a.engagement);
}

TEST_CASE("files are well formed and aligned") {
  auto cfg = small_config();
  auto out = generate(cfg);
  auto corpus = engagement_of(out);
  auto gold = gold_of(out);
  validate_corpus(corpus);
  REQUIRE(corpus.records.size() == cfg.queries);
  REQUIRE(gold.size() == cfg.queries);
  for (std::size_t q = 0; q < gold.size(); ++q) {
    CHECK(gold[q].tokens.size() >= cfg.min_length);
    CHECK(gold[q].tokens.size() <= cfg.max_length);
    CHECK(corpus.records[q].query.size() == gold[q].tokens.size());
  }
  std::istringstream cat(out.catalog);
  auto products = load_catalog(cat);
  CHECK_FALSE(products.empty());
  std::istringstream jud(out.judgments);
  auto judgments = load_judgments(jud);
  for (const auto& [query, per_product] : judgments) {
    for (const auto& [_, n] : per_product) CHECK(n >= 1);
  }
}

TEST_CASE("disjoint support makes the gold key a lookup") {
  auto out = generate(small_config());
  const auto& p = out.params;
  std::map<std::string, std::string> owner;
  for (std::size_t v = 0; v < p.words.size(); ++v) {
    std::size_t emitters = 0;
    for (std::size_t m = 0; m < p.psi.rows(); ++m) {
      if (p.psi(m, v) > 0.0) {
        ++emitters;
        owner[p.words[v]] = p.slots[m].key;
      }
    }
    CHECK(emitters <= 1);
  }
  for (const auto& g : gold_of(out)) {
    for (std::size_t i = 0; i < g.tokens.size(); ++i) CHECK(owner.at(g.tokens[i]) == g.keys[i]);
  }
}

TEST_CASE("noise slot is in every candidate set and never in gold") {
  auto cfg = small_config();
  cfg.noise_slot = true;
  auto out = generate(cfg);
  REQUIRE(out.params.noise_slot != 0);
  auto corpus = engagement_of(out);
  const auto noise = corpus.registry.find_slot("noise", "noise");
  REQUIRE(noise);
  for (const auto& r : corpus.records) CHECK(r.candidates.contains(*noise));
  for (const auto& g : gold_of(out)) {
    for (const auto& k : g.keys) CHECK(k != "noise");
  }
  for (std::size_t v = 0; v < out.params.psi.cols(); ++v) CHECK(out.params.psi(out.params.noise_slot, v) == 0.0);
}

TEST_CASE("clique mode keeps cliques apart") {
  auto cfg = small_config();
  cfg.clique_mode = true;
  cfg.n_categories = 2;
  auto corpus = engagement_of(generate(cfg));
  for (const auto& r : corpus.records) {
    std::set<std::string> clique;
    for (SlotId s : r.candidates.slots) {
      if (s == kMiscSlot) continue;
      // Values look like "<key>-<j> <top word>"; j is the clique.
      const auto& value = corpus.registry.slot(s).value;
      const auto head = value.substr(0, value.find(' '));
      clique.insert(head.substr(head.rfind('-') + 1));
    }
    CHECK(clique.size() <= 1);
  }
}

TEST_CASE("ambiguous words are shared by two slots") {
  auto cfg = small_config();
  cfg.ambiguous_words = 4;
  auto out = generate(cfg);
  std::size_t shared = 0;
  for (std::size_t v = 0; v < out.params.psi.cols(); ++v) {
    std::size_t emitters = 0;
    for (std::size_t m = 0; m < out.params.psi.rows(); ++m) emitters += out.params.psi(m, v) > 0.0;
    CHECK(emitters <= 2);
    shared += emitters == 2;
  }
  CHECK(shared == 4);
}

TEST_CASE("config parsing and validation") {
  auto cfg = parse_synth_config(nlohmann::json{{"n_keys", 4}, {"noise_slot", true}});
  CHECK(cfg.n_keys == 4);
  CHECK(cfg.noise_slot);
  CHECK(parse_synth_config(to_json(cfg)).n_keys == 4);
  CHECK_THROWS_AS(parse_synth_config(nlohmann::json{{"bogus", 1}}), UsageError);
  CHECK_THROWS_AS(parse_synth_config(nlohmann::json{{"n_keys", "six"}}), UsageError);
  SynthConfig tiny;
  tiny.vocab_size = 5;
  CHECK_THROWS_AS(validate(tiny), UsageError);
  SynthConfig bad_gamma;
  bad_gamma.gamma = 0.0;
  CHECK_THROWS_AS(validate(bad_gamma), UsageError);
}

TEST_CASE("write_synth writes the five files") {
  const auto dir = std::filesystem::temp_directory_path() / "slotfill_synth_test";
  std::filesystem::remove_all(dir);
  auto out = generate(small_config());
  write_synth(out, dir);
  for (const char* name :
       {"engagement.jsonl", "annotations.jsonl", "catalog.jsonl", "judgments.jsonl", "planted-params.json"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  std::ifstream in(dir / "engagement.jsonl");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == out.engagement);
  std::filesystem::remove_all(dir);
}
