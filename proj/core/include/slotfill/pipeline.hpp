#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/evalmetrics.hpp"
#include "slotfill/model_io.hpp"

namespace slotfill {

struct TrainOptions {
  ModelType type = ModelType::kUsd;
  int iterations = 1000;
  std::uint64_t seed = 0;
  Hyperparameters hyper;
  Count min_word_freq = 50;
  Count min_slot_freq = 50;
};

/// Filters the corpus, trains the requested model and packages its counts.
ModelFile train_model(const Corpus& corpus, const TrainOptions& options);

/// One query to annotate, with its candidate slots when they are observed.
struct QueryInput {
  std::string query;
  std::optional<std::vector<SlotText>> candidates;
};

/// Reads {"query", "candidates"|"slots": [...]} JSONL; the slot list is optional.
std::vector<QueryInput> load_queries(std::istream& in);

/// Default weight of the candidate-set prior in selection, per model.
double default_mu(ModelType type);

struct AnnotateOptions {
  bool observed = false;
  std::size_t top_t = 1;
  std::optional<double> mu;
  std::size_t max_sets = 50000;
  int infer_iterations = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Tags every query. With `observed`, each query must carry candidates and
/// the model tags under them directly; otherwise candidate sets are
/// enumerated from top-t pools and the model selects one. Query j uses
/// RandomSource(seed).child(j), so output does not depend on `threads`.
std::vector<TaggedQuery> annotate_queries(const ModelFile& model, const std::vector<QueryInput>& queries,
                                          const AnnotateOptions& options);

}  // namespace slotfill
