#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slotfill/corpus.hpp"
#include "slotfill/distributions.hpp"

namespace slotfill {

/// Parameters of the planted generator. Queries follow the CUSDSS generative
/// story: category z ~ phi, one slot per present key from chi_z, a Bernoulli
/// gamma selection of the intent, slots uniform over the intent, words from psi.
struct SynthConfig {
  std::size_t n_keys = 6;
  std::size_t values_per_key = 2;
  std::size_t vocab_size = 65;
  std::size_t n_categories = 4;
  std::size_t queries = 5000;
  std::size_t min_length = 3;
  std::size_t max_length = 6;
  double gamma = 0.7;
  /// Symmetric Dirichlet concentration of every planted psi row; small values
  /// give peaked emissions.
  double emission_concentration = 0.5;
  /// Adds a key "noise" with one slot that sits in every candidate set but is
  /// never selected and never emits.
  bool noise_slot = false;
  /// Each emitting slot owns a private block of the vocabulary.
  bool disjoint_support = true;
  std::uint64_t seed = 42;
  /// Probability that a non-miscellaneous key contributes a slot to c_q.
  double key_presence = 0.8;
  double alpha = 1.0;
  double beta = 1.0;
  /// Category z always picks value z mod values_per_key of every key, so the
  /// slots split into cliques that never co-occur.
  bool clique_mode = false;
  /// Words shared by two slots of different keys and different cliques.
  /// Only available with disjoint support.
  std::size_t ambiguous_words = 0;
  double purchases_mean = 2.0;
};

/// Throws UsageError on unknown fields, wrong types or invalid values.
SynthConfig parse_synth_config(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);
void validate(const SynthConfig& config);

struct PlantedParams {
  std::vector<std::string> keys;  // index 0 is miscellaneous
  std::vector<SlotText> slots;    // index 0 is the miscellaneous slot
  std::vector<std::string> words;
  std::vector<double> phi;
  Matrix chi;  // categories x slots: probability that the slot is in c_q
  Matrix psi;  // slots x words; the noise row is all zero
  std::size_t noise_slot = 0;  // 0 when absent
};

struct SynthOutput {
  std::string engagement;
  std::string annotations;
  std::string catalog;
  std::string judgments;
  std::string planted;  // planted-params.json
  PlantedParams params;
};

SynthOutput generate(const SynthConfig& config);

/// Writes engagement.jsonl, annotations.jsonl, catalog.jsonl, judgments.jsonl
/// and planted-params.json into `dir`, creating it if needed.
void write_synth(const SynthOutput& output, const std::filesystem::path& dir);

}  // namespace slotfill
