#include "slotfill/model_io.hpp"

#include <istream>
#include <ostream>

#include "slotfill/error.hpp"

namespace slotfill {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& msg) { throw DataError("model file: " + msg); }

json sparse(const CountTable& t) {
  json out = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      if (t.at(r, c) != 0) out.push_back(json::array({r, c, t.at(r, c)}));
    }
  }
  return out;
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) schema_error(std::string("missing field '") + name + "'");
  return *it;
}

Count count_value(const json& v, const char* what) {
  if (!v.is_number_integer()) schema_error(std::string(what) + ": counts must be integers");
  const auto c = v.get<Count>();
  if (c < 0) schema_error(std::string(what) + ": negative count");
  return c;
}

CountTable dense(const json& triples, std::size_t rows, std::size_t cols, const char* what) {
  if (!triples.is_array()) schema_error(std::string(what) + " must be an array");
  CountTable t(rows, cols);
  for (const auto& e : triples) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      schema_error(std::string(what) + ": entries must be [row, col, count]");
    }
    const auto r = e[0].get<std::size_t>(), c = e[1].get<std::size_t>();
    if (r >= rows || c >= cols) schema_error(std::string(what) + ": index out of range");
    if (t.at(r, c) != 0) schema_error(std::string(what) + ": duplicate cell");
    t.set(r, c, count_value(e[2], what));
  }
  return t;
}

double positive(const json& h, const char* name) {
  const auto& v = field(h, name);
  if (!v.is_number() || !(v.get<double>() > 0.0)) schema_error(std::string(name) + " must be a positive number");
  return v.get<double>();
}

}  // namespace

std::string_view model_type_name(ModelType type) {
  switch (type) {
    case ModelType::kUsd: return "usd";
    case ModelType::kMsd: return "msd";
    case ModelType::kCusd: return "cusd";
    case ModelType::kCusdss: return "cusdss";
  }
  return "usd";
}

ModelType parse_model_type(std::string_view name) {
  if (name == "usd") return ModelType::kUsd;
  if (name == "msd") return ModelType::kMsd;
  if (name == "cusd") return ModelType::kCusd;
  if (name == "cusdss") return ModelType::kCusdss;
  throw UsageError("unknown model type '" + std::string(name) + "'");
}

UsdModel ModelFile::usd() const { return UsdModel(emission); }
MsdModel ModelFile::msd() const { return MsdModel(emission, hyper.zeta, transitions); }
CusdModel ModelFile::cusd() const { return CusdModel(emission, cusd_hyper(), category_counts, category_slots); }
CusdssModel ModelFile::cusdss() const {
  return CusdssModel(cusdss_hyper(), CusdssCounts{emission, category_counts, category_slots});
}
CusdHyper ModelFile::cusd_hyper() const {
  return {hyper.num_categories, hyper.alpha, hyper.beta, hyper.delta};
}
CusdssHyper ModelFile::cusdss_hyper() const {
  return {hyper.num_categories, hyper.alpha, hyper.beta, hyper.gamma, hyper.delta};
}

ModelFile model_file(const SlotRegistry& registry, const UsdState& state, std::uint64_t seed, int iterations) {
  ModelFile f;
  f.type = ModelType::kUsd;
  f.hyper.delta = state.emission.delta;
  f.registry = registry;
  f.emission = state.emission;
  f.seed = seed;
  f.iterations = iterations;
  return f;
}

ModelFile model_file(const SlotRegistry& registry, const MsdState& state, std::uint64_t seed, int iterations) {
  ModelFile f = model_file(registry, state.tagging, seed, iterations);
  f.type = ModelType::kMsd;
  f.hyper.zeta = state.zeta;
  f.transitions = state.transitions;
  return f;
}

ModelFile model_file(const SlotRegistry& registry, const CusdState& state, std::uint64_t seed, int iterations) {
  ModelFile f = model_file(registry, state.tagging, seed, iterations);
  f.type = ModelType::kCusd;
  f.hyper.alpha = state.hyper.alpha;
  f.hyper.beta = state.hyper.beta;
  f.hyper.num_categories = state.hyper.num_categories;
  f.category_counts = state.category_counts;
  f.category_slots = state.category_slots;
  return f;
}

ModelFile model_file(const SlotRegistry& registry, const CusdssState& state, std::uint64_t seed,
                     int iterations) {
  ModelFile f;
  f.type = ModelType::kCusdss;
  f.hyper.delta = state.counts.emission.delta;
  f.hyper.alpha = state.hyper.alpha;
  f.hyper.beta = state.hyper.beta;
  f.hyper.gamma = state.hyper.gamma;
  f.hyper.num_categories = state.hyper.num_categories;
  f.registry = registry;
  f.emission = state.counts.emission;
  f.category_counts = state.counts.category_counts;
  f.category_slots = state.counts.selection;
  f.seed = seed;
  f.iterations = iterations;
  return f;
}

json save_model(const ModelFile& m) {
  json hyper{{"delta", m.hyper.delta}};
  if (m.type == ModelType::kMsd) hyper["zeta"] = m.hyper.zeta;
  if (m.type == ModelType::kCusd || m.type == ModelType::kCusdss) {
    hyper["alpha"] = m.hyper.alpha;
    hyper["beta"] = m.hyper.beta;
    hyper["num_categories"] = m.hyper.num_categories;
  }
  if (m.type == ModelType::kCusdss) hyper["gamma"] = m.hyper.gamma;

  json slots = json::array();
  for (const auto& s : m.registry.slots()) slots.push_back({{"key", m.registry.key(s.key)}, {"value", s.value}});

  json counts{{"emission", sparse(m.emission.counts)}};
  if (m.type == ModelType::kMsd) counts["transitions"] = sparse(m.transitions);
  if (m.type == ModelType::kCusd || m.type == ModelType::kCusdss) {
    counts["categories"] = m.category_counts;
    counts[m.type == ModelType::kCusd ? "category_slots" : "selection"] = sparse(m.category_slots);
  }

  return {{"format_version", kModelFormatVersion},
          {"model_type", model_type_name(m.type)},
          {"hyperparameters", hyper},
          {"registry", {{"terms", m.registry.terms()}, {"keys", m.registry.keys()}, {"slots", slots}}},
          {"counts", counts},
          {"seed", m.seed},
          {"iterations", m.iterations}};
}

ModelFile load_model(const json& j) {
  if (!j.is_object()) schema_error("expected a JSON object");
  const auto& version = field(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
    schema_error("unsupported format_version " + version.dump() + " (expected " +
                 std::to_string(kModelFormatVersion) + ")");
  }
  ModelFile m;
  const auto& type = field(j, "model_type");
  if (!type.is_string()) schema_error("model_type must be a string");
  try {
    m.type = parse_model_type(type.get<std::string>());
  } catch (const UsageError& e) {
    schema_error(e.what());
  }

  const auto& h = field(j, "hyperparameters");
  if (!h.is_object()) schema_error("hyperparameters must be an object");
  m.hyper.delta = positive(h, "delta");
  if (m.type == ModelType::kMsd) m.hyper.zeta = positive(h, "zeta");
  if (m.type == ModelType::kCusd || m.type == ModelType::kCusdss) {
    m.hyper.alpha = positive(h, "alpha");
    m.hyper.beta = positive(h, "beta");
    const auto& k = field(h, "num_categories");
    if (!k.is_number_unsigned() || k.get<std::size_t>() < 1) schema_error("num_categories must be >= 1");
    m.hyper.num_categories = k.get<std::size_t>();
  }
  if (m.type == ModelType::kCusdss) {
    m.hyper.gamma = positive(h, "gamma");
    if (m.hyper.gamma >= 1.0) schema_error("gamma must be < 1");
  }

  const auto& reg = field(j, "registry");
  const auto& keys = field(reg, "keys");
  const auto& terms = field(reg, "terms");
  const auto& slots = field(reg, "slots");
  if (!keys.is_array() || keys.empty() || keys[0] != kMiscKey) {
    schema_error("registry keys must start with the miscellaneous key");
  }
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (!keys[i].is_string() || m.registry.intern_key(keys[i].get<std::string>()) != i) {
      schema_error("registry keys must be distinct strings");
    }
  }
  if (!terms.is_array()) schema_error("registry terms must be an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i].is_string() || m.registry.intern_term(terms[i].get<std::string>()) != i) {
      schema_error("registry terms must be distinct strings");
    }
  }
  if (!slots.is_array() || slots.empty()) schema_error("registry slots must be a non-empty array");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    if (!s.is_object() || !field(s, "key").is_string() || !field(s, "value").is_string()) {
      schema_error("registry slots must be {key, value} objects");
    }
    const auto key = s["key"].get<std::string>(), value = s["value"].get<std::string>();
    if (i == 0) {
      if (key != kMiscKey || value != kMiscKey) schema_error("slot 0 must be the miscellaneous slot");
      continue;
    }
    if (!m.registry.find_key(key) || key == kMiscKey) schema_error("slot with unknown key '" + key + "'");
    if (m.registry.find_slot(key, value)) schema_error("duplicate slot " + key + "=" + value);
    m.registry.intern_slot(key, value);
  }

  const std::size_t M = m.registry.num_slots(), V = m.registry.num_terms();
  const auto& counts = field(j, "counts");
  m.emission = EmissionCounts(M, V, m.hyper.delta);
  m.emission.counts = dense(field(counts, "emission"), M, V, "emission");
  if (m.type == ModelType::kMsd) m.transitions = dense(field(counts, "transitions"), M + 1, M, "transitions");
  if (m.type == ModelType::kCusd || m.type == ModelType::kCusdss) {
    const std::size_t K = m.hyper.num_categories;
    const auto& u = field(counts, "categories");
    if (!u.is_array() || u.size() != K) schema_error("categories must have num_categories entries");
    for (const auto& c : u) m.category_counts.push_back(count_value(c, "categories"));
    if (m.type == ModelType::kCusd) {
      m.category_slots = dense(field(counts, "category_slots"), K, M, "category_slots");
    } else {
      m.category_slots = dense(field(counts, "selection"), K, 2 * M, "selection");
    }
  }

  const auto& seed = field(j, "seed");
  const auto& iters = field(j, "iterations");
  if (!seed.is_number_unsigned()) schema_error("seed must be a non-negative integer");
  if (!iters.is_number_integer() || iters.get<long long>() < 0) schema_error("iterations must be >= 0");
  m.seed = seed.get<std::uint64_t>();
  m.iterations = iters.get<int>();
  return m;
}

void write_model(const ModelFile& model, std::ostream& out) { out << save_model(model).dump(1) << '\n'; }

ModelFile read_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model file: malformed JSON: ") + e.what());
  }
  return load_model(j);
}

void require_model_type(const ModelFile& model, ModelType expected) {
  if (model.type != expected) {
    throw DataError("model type mismatch: file holds a " + std::string(model_type_name(model.type)) +
                    " model, " + std::string(model_type_name(expected)) + " was requested");
  }
}

}  // namespace slotfill
