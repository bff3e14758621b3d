#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slotfill/corpus.hpp"
#include "slotfill/cusd.hpp"
#include "slotfill/cusdss.hpp"
#include "slotfill/distributions.hpp"
#include "slotfill/emission.hpp"
#include "slotfill/msd.hpp"
#include "slotfill/usd.hpp"

namespace slotfill {

inline constexpr int kModelFormatVersion = 1;

enum class ModelType { kUsd, kMsd, kCusd, kCusdss };

std::string_view model_type_name(ModelType type);
/// "usd" | "msd" | "cusd" | "cusdss"; anything else is a UsageError.
ModelType parse_model_type(std::string_view name);

struct Hyperparameters {
  double delta = 0.1;
  double zeta = 10000.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.7;
  std::size_t num_categories = 60;
};

/// Everything a trained model needs at inference time. Only counts are
/// stored; distributions are recomputed by posterior mean when a model is
/// built from the file.
struct ModelFile {
  ModelType type = ModelType::kUsd;
  Hyperparameters hyper;
  SlotRegistry registry;
  EmissionCounts emission;
  CountTable transitions;              // msd: (M + 1) x M
  std::vector<Count> category_counts;  // cusd, cusdss: U
  CountTable category_slots;           // cusd: K x M, cusdss: K x 2M
  std::uint64_t seed = 0;
  int iterations = 0;

  UsdModel usd() const;
  MsdModel msd() const;
  CusdModel cusd() const;
  CusdssModel cusdss() const;
  CusdHyper cusd_hyper() const;
  CusdssHyper cusdss_hyper() const;
};

ModelFile model_file(const SlotRegistry& registry, const UsdState& state, std::uint64_t seed, int iterations);
ModelFile model_file(const SlotRegistry& registry, const MsdState& state, std::uint64_t seed, int iterations);
ModelFile model_file(const SlotRegistry& registry, const CusdState& state, std::uint64_t seed, int iterations);
ModelFile model_file(const SlotRegistry& registry, const CusdssState& state, std::uint64_t seed,
                     int iterations);

/// Counts are written sparsely as [row, col, count] triples in row-major order.
nlohmann::json save_model(const ModelFile& model);
/// Throws DataError on a version mismatch or any schema violation (including
/// negative or non-integer counts).
ModelFile load_model(const nlohmann::json& j);

void write_model(const ModelFile& model, std::ostream& out);
ModelFile read_model(std::istream& in);

/// Throws DataError("model type mismatch ...") unless `model.type == expected`.
void require_model_type(const ModelFile& model, ModelType expected);

}  // namespace slotfill
