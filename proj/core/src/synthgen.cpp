#include "slotfill/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "jsonl.hpp"
#include "slotfill/error.hpp"

namespace slotfill {

namespace {

const char* const kKeyNames[] = {"product-type", "brand", "gender", "color", "age", "size"};

std::string key_name(std::size_t k) {
  return k < std::size(kKeyNames) ? kKeyNames[k] : "key" + std::to_string(k);
}

template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& out) {
  auto it = j.find(name);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw UsageError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer() || it->get<long long>() < 0) throw UsageError("");
    } else {
      if (!it->is_number()) throw UsageError("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    throw UsageError(std::string("synth config: bad value for '") + name + "'");
  }
}

std::vector<double> sample_dirichlet(std::size_t dim, double concentration, std::mt19937_64& engine) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> x(dim);
  double total = 0.0;
  for (auto& v : x) total += (v = gamma(engine));
  if (total <= 0.0) {
    std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(dim));
  } else {
    for (auto& v : x) v /= total;
  }
  return x;
}

}  // namespace

SynthConfig parse_synth_config(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("synth config must be a JSON object");
  static const char* const known[] = {
      "n_keys",    "values_per_key", "vocab_size", "n_categories",  "queries",
      "min_length", "max_length",    "gamma",      "emission_concentration",
      "noise_slot", "disjoint_support", "seed",    "key_presence",  "alpha",
      "beta",      "clique_mode",    "ambiguous_words", "purchases_mean"};
  for (const auto& [name, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return name == k; }) ==
        std::end(known)) {
      throw UsageError("synth config: unknown field '" + name + "'");
    }
  }
  SynthConfig c;
  read_field(j, "n_keys", c.n_keys);
  read_field(j, "values_per_key", c.values_per_key);
  read_field(j, "vocab_size", c.vocab_size);
  read_field(j, "n_categories", c.n_categories);
  read_field(j, "queries", c.queries);
  read_field(j, "min_length", c.min_length);
  read_field(j, "max_length", c.max_length);
  read_field(j, "gamma", c.gamma);
  read_field(j, "emission_concentration", c.emission_concentration);
  read_field(j, "noise_slot", c.noise_slot);
  read_field(j, "disjoint_support", c.disjoint_support);
  read_field(j, "seed", c.seed);
  read_field(j, "key_presence", c.key_presence);
  read_field(j, "alpha", c.alpha);
  read_field(j, "beta", c.beta);
  read_field(j, "clique_mode", c.clique_mode);
  read_field(j, "ambiguous_words", c.ambiguous_words);
  read_field(j, "purchases_mean", c.purchases_mean);
  validate(c);
  return c;
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"n_keys", c.n_keys},
          {"values_per_key", c.values_per_key},
          {"vocab_size", c.vocab_size},
          {"n_categories", c.n_categories},
          {"queries", c.queries},
          {"min_length", c.min_length},
          {"max_length", c.max_length},
          {"gamma", c.gamma},
          {"emission_concentration", c.emission_concentration},
          {"noise_slot", c.noise_slot},
          {"disjoint_support", c.disjoint_support},
          {"seed", c.seed},
          {"key_presence", c.key_presence},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"clique_mode", c.clique_mode},
          {"ambiguous_words", c.ambiguous_words},
          {"purchases_mean", c.purchases_mean}};
}

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& msg) { throw UsageError("synth config: " + msg); };
  if (c.n_keys < 1) fail("n_keys must be >= 1");
  if (c.values_per_key < 1) fail("values_per_key must be >= 1");
  if (c.n_categories < 1) fail("n_categories must be >= 1");
  if (c.queries < 1) fail("queries must be >= 1");
  if (c.min_length < 1 || c.max_length < c.min_length) fail("need 1 <= min_length <= max_length");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(c.emission_concentration > 0.0)) fail("emission_concentration must be > 0");
  if (!(c.key_presence >= 0.0 && c.key_presence <= 1.0)) fail("key_presence must be in [0, 1]");
  if (!(c.alpha > 0.0) || !(c.beta > 0.0)) fail("alpha and beta must be > 0");
  if (!(c.purchases_mean >= 0.0)) fail("purchases_mean must be >= 0");
  const std::size_t emitting = 1 + c.n_keys * c.values_per_key;
  if (c.disjoint_support && c.vocab_size < emitting + c.ambiguous_words) {
    fail("vocab_size must be at least the number of emitting slots (" + std::to_string(emitting) +
         ") plus ambiguous_words in disjoint-support mode");
  }
  if (!c.disjoint_support && c.vocab_size < 1) fail("vocab_size must be >= 1");
  if (c.ambiguous_words > 0) {
    if (!c.disjoint_support) fail("ambiguous_words requires disjoint_support");
    if (c.n_keys < 2 || c.values_per_key < 2) fail("ambiguous_words needs n_keys >= 2 and values_per_key >= 2");
  }
  if (c.clique_mode && (c.values_per_key < 2 || c.n_categories < 2)) {
    fail("clique_mode needs values_per_key >= 2 and n_categories >= 2");
  }
}

SynthOutput generate(const SynthConfig& config) {
  validate(config);
  RandomSource rng(config.seed);
  auto& engine = rng.engine();

  const std::size_t K = config.n_keys;
  const std::size_t J = config.values_per_key;
  const std::size_t emitting = 1 + K * J;
  const std::size_t M = emitting + (config.noise_slot ? 1 : 0);
  const std::size_t V = config.vocab_size;
  auto slot_of = [&](std::size_t k, std::size_t j) { return 1 + k * J + j; };

  PlantedParams p;
  p.keys.emplace_back(kMiscKey);
  for (std::size_t k = 0; k < K; ++k) p.keys.push_back(key_name(k));
  if (config.noise_slot) p.keys.emplace_back("noise");
  for (std::size_t w = 0; w < V; ++w) p.words.push_back("w" + std::to_string(w));

  // Emission supports.
  std::vector<std::vector<std::size_t>> support(M);
  if (config.disjoint_support) {
    const std::size_t regular = V - config.ambiguous_words;
    for (std::size_t e = 0; e < emitting; ++e) {
      for (std::size_t w = e * regular / emitting; w < (e + 1) * regular / emitting; ++w) {
        support[e].push_back(w);
      }
    }
    for (std::size_t a = 0; a < config.ambiguous_words; ++a) {
      const std::size_t w = regular + a;
      support[slot_of(a % K, 0)].push_back(w);
      support[slot_of((a + 1) % K, 1)].push_back(w);
    }
  } else {
    for (std::size_t e = 0; e < emitting; ++e) {
      for (std::size_t w = 0; w < V; ++w) support[e].push_back(w);
    }
  }
  p.psi = Matrix(M, V);
  for (std::size_t e = 0; e < emitting; ++e) {
    auto x = sample_dirichlet(support[e].size(), config.emission_concentration, engine);
    for (std::size_t i = 0; i < x.size(); ++i) p.psi(e, support[e][i]) = x[i];
  }

  p.slots.push_back({std::string(kMiscKey), std::string(kMiscKey)});
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < J; ++j) {
      const auto row = p.psi.row(slot_of(k, j));
      const auto top = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      p.slots.push_back({p.keys[k + 1], p.keys[k + 1] + "-" + std::to_string(j) + " " + p.words[top]});
    }
  }
  if (config.noise_slot) {
    p.noise_slot = emitting;
    p.slots.push_back({"noise", "noise"});
  }

  // Category prior and per-key value distributions.
  const std::size_t Z = config.n_categories;
  p.phi = sample_dirichlet(Z, config.alpha, engine);
  std::vector<std::vector<std::vector<double>>> values(Z, std::vector<std::vector<double>>(K));
  p.chi = Matrix(Z, M);
  for (std::size_t z = 0; z < Z; ++z) {
    p.chi(z, kMiscSlot) = 1.0;
    if (config.noise_slot) p.chi(z, p.noise_slot) = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (config.clique_mode) {
        values[z][k].assign(J, 0.0);
        values[z][k][z % J] = 1.0;
      } else {
        values[z][k] = sample_dirichlet(J, config.beta, engine);
      }
      for (std::size_t j = 0; j < J; ++j) p.chi(z, slot_of(k, j)) = config.key_presence * values[z][k][j];
    }
  }

  std::ostringstream engagement, annotations, catalog, judgments;
  std::map<std::vector<std::size_t>, std::string> products;
  std::poisson_distribution<int> poisson(config.purchases_mean > 0.0 ? config.purchases_mean : 1.0);

  for (std::size_t q = 0; q < config.queries; ++q) {
    const std::size_t z = sample_index(p.phi, rng);
    std::vector<std::size_t> c{kMiscSlot};
    for (std::size_t k = 0; k < K; ++k) {
      if (rng.uniform() < config.key_presence) c.push_back(slot_of(k, sample_index(values[z][k], rng)));
    }

    std::vector<std::size_t> intent;
    while (intent.empty()) {
      for (auto m : c) {
        if (rng.uniform() < config.gamma) intent.push_back(m);
      }
    }
    if (config.noise_slot) c.push_back(p.noise_slot);

    const std::size_t len = config.min_length + rng.uniform_index(config.max_length - config.min_length + 1);
    std::string text;
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t y = intent[rng.uniform_index(intent.size())];
      const std::size_t v = sample_index(p.psi.row(y), rng);
      if (!text.empty()) text.push_back(' ');
      text += p.words[v];
      keys.push_back(p.slots[y].key);
    }

    nlohmann::json slots = nlohmann::json::array();
    for (auto m : c) {
      if (m != kMiscSlot) slots.push_back(detail::slot_json(p.slots[m]));
    }
    std::vector<std::size_t> product_key(c.begin() + 1, c.end());
    auto [it, fresh] = products.try_emplace(product_key, "p" + std::to_string(products.size()));
    if (fresh) catalog << nlohmann::json{{"product_id", it->second}, {"slots", slots}}.dump() << '\n';

    engagement << nlohmann::json{{"query", text}, {"slots", slots}}.dump() << '\n';
    annotations << nlohmann::json{{"query", text}, {"keys", keys}}.dump() << '\n';
    const int purchases = 1 + (config.purchases_mean > 0.0 ? poisson(engine) : 0);
    judgments << nlohmann::json{{"query", text}, {"product_id", it->second}, {"purchases", purchases}}.dump()
              << '\n';
  }

  nlohmann::json chi = nlohmann::json::array();
  for (std::size_t z = 0; z < Z; ++z) {
    const auto row = p.chi.row(z);
    chi.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json psi = nlohmann::json::array();
  for (std::size_t m = 0; m < M; ++m) {
    const auto row = p.psi.row(m);
    psi.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& s : p.slots) slots.push_back(detail::slot_json(s));
  const nlohmann::json planted{{"seed", config.seed}, {"config", to_json(config)}, {"phi", p.phi},
                               {"chi", chi},          {"psi", psi},               {"keys", p.keys},
                               {"slots", slots},      {"words", p.words}};

  return {engagement.str(), annotations.str(), catalog.str(), judgments.str(), planted.dump(2) + "\n",
          std::move(p)};
}

void write_synth(const SynthOutput& output, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    out << body;
  };
  write("engagement.jsonl", output.engagement);
  write("annotations.jsonl", output.annotations);
  write("catalog.jsonl", output.catalog);
  write("judgments.jsonl", output.judgments);
  write("planted-params.json", output.planted);
}

}  // namespace slotfill
