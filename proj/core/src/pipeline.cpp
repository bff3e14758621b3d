#include "slotfill/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <variant>

#include "jsonl.hpp"
#include "slotfill/candidates.hpp"
#include "slotfill/error.hpp"

namespace slotfill {

ModelFile train_model(const Corpus& corpus, const TrainOptions& o) {
  if (o.iterations < 1) throw UsageError("--iters must be >= 1");
  if (o.min_word_freq < 1 || o.min_slot_freq < 1) throw UsageError("frequency thresholds must be >= 1");
  const Corpus filtered = filter_corpus(corpus, o.min_word_freq, o.min_slot_freq);
  RandomSource rng(o.seed);
  const auto& h = o.hyper;
  switch (o.type) {
    case ModelType::kUsd:
      return model_file(filtered.registry, usd_train(filtered, h.delta, o.iterations, rng), o.seed, o.iterations);
    case ModelType::kMsd:
      return model_file(filtered.registry, msd_train(filtered, h.delta, h.zeta, o.iterations, rng), o.seed,
                        o.iterations);
    case ModelType::kCusd:
      return model_file(filtered.registry,
                        cusd_train(filtered, {h.num_categories, h.alpha, h.beta, h.delta}, o.iterations, rng),
                        o.seed, o.iterations);
    case ModelType::kCusdss:
      if (!(h.gamma > 0.0 && h.gamma < 1.0)) throw UsageError("--gamma must be in (0, 1)");
      return model_file(filtered.registry,
                        cusdss_train(filtered, {h.num_categories, h.alpha, h.beta, h.gamma, h.delta},
                                     o.iterations, rng),
                        o.seed, o.iterations);
  }
  throw UsageError("unknown model type");
}

std::vector<QueryInput> load_queries(std::istream& in) {
  std::vector<QueryInput> out;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line_no) {
    QueryInput q;
    q.query = detail::require_string(obj, "query", line_no);
    if (tokenize(q.query).empty()) throw DataError("line " + std::to_string(line_no) + ": empty query");
    if (auto it = obj.find("candidates"); it != obj.end()) {
      q.candidates = detail::parse_slot_list(*it, line_no);
    } else if (auto s = obj.find("slots"); s != obj.end()) {
      q.candidates = detail::parse_slot_list(*s, line_no);
    }
    out.push_back(std::move(q));
  });
  return out;
}

double default_mu(ModelType type) {
  switch (type) {
    case ModelType::kMsd: return 1.0;
    case ModelType::kCusd: return 0.15;
    default: return 0.0;
  }
}

namespace {

using AnyModel = std::variant<UsdModel, MsdModel, CusdModel, CusdssModel>;

AnyModel build(const ModelFile& f) {
  switch (f.type) {
    case ModelType::kUsd: return f.usd();
    case ModelType::kMsd: return f.msd();
    case ModelType::kCusd: return f.cusd();
    case ModelType::kCusdss: return f.cusdss();
  }
  throw UsageError("unknown model type");
}

const Matrix& psi_of(const AnyModel& m) {
  return std::visit([](const auto& x) -> const Matrix& { return x.psi; }, m);
}

std::vector<SlotId> tag_observed(const AnyModel& model, const Query& q, const CandidateSlotSet& c,
                                 const AnnotateOptions& o, RandomSource& rng) {
  if (const auto* m = std::get_if<MsdModel>(&model)) return viterbi_decode(m->psi, m->upsilon, q, c, kMiscSlot).path;
  if (const auto* m = std::get_if<CusdssModel>(&model)) return cusdss_infer(*m, q, c, o.infer_iterations, rng).slots;
  // CUSD tags an observed candidate set exactly like USD.
  return usd_annotate(psi_of(model), q, c, kMiscSlot);
}

std::vector<SlotId> tag_unobserved(const AnyModel& model, const SlotRegistry& registry, const Query& q,
                                   double mu, const AnnotateOptions& o, RandomSource& rng) {
  const auto sets = enumerate_sets(top_t_pools(psi_of(model), registry, q, o.top_t), o.max_sets).sets;
  if (const auto* m = std::get_if<UsdModel>(&model)) return usd_select(m->psi, q, sets, kMiscSlot).slots;
  if (const auto* m = std::get_if<MsdModel>(&model)) {
    return msd_select(m->psi, m->upsilon, q, sets, mu, kMiscSlot).slots;
  }
  if (const auto* m = std::get_if<CusdModel>(&model)) {
    return cusd_select(m->psi, m->phi, m->chi, q, sets, mu, kMiscSlot).slots;
  }
  return cusdss_select(std::get<CusdssModel>(model), q, sets, mu, o.infer_iterations, rng).slots;
}

TaggedQuery to_tagged(const std::string& text, const std::vector<SlotId>& slots, const SlotRegistry& registry) {
  TaggedQuery t;
  t.query = text;
  for (auto m : slots) {
    t.keys.push_back(registry.slot_key(m));
    auto s = registry.slot_text(m);
    if (std::find(t.slots.begin(), t.slots.end(), s) == t.slots.end()) t.slots.push_back(std::move(s));
  }
  return t;
}

}  // namespace

std::vector<TaggedQuery> annotate_queries(const ModelFile& file, const std::vector<QueryInput>& queries,
                                          const AnnotateOptions& o) {
  if (o.top_t < 1) throw UsageError("--top-t must be >= 1");
  if (o.max_sets < 1) throw UsageError("--max-sets must be >= 1");
  if (o.observed) {
    for (std::size_t j = 0; j < queries.size(); ++j) {
      if (!queries[j].candidates) {
        throw DataError("query " + std::to_string(j + 1) + " ('" + queries[j].query +
                        "') has no candidate slots but --observed was given");
      }
    }
  }
  const AnyModel model = build(file);
  const double mu = o.mu.value_or(default_mu(file.type));
  const RandomSource root(o.seed);
  std::vector<TaggedQuery> out(queries.size());

  auto work = [&](std::size_t j) {
    const auto& in = queries[j];
    const Query q = lookup_query(file.registry, tokenize(in.query));
    RandomSource rng = root.child(j);
    const auto slots = o.observed
                           ? tag_observed(model, q, lookup_candidate_set(file.registry, *in.candidates), o, rng)
                           : tag_unobserved(model, file.registry, q, mu, o, rng);
    out[j] = to_tagged(in.query, slots, file.registry);
  };

  const unsigned threads = std::max(1u, o.threads);
  if (threads == 1 || queries.size() < 2) {
    for (std::size_t j = 0; j < queries.size(); ++j) work(j);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j; (j = next.fetch_add(1)) < queries.size();) {
        try {
          work(j);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = queries.size();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace slotfill
