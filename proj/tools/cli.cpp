#include "slotfill/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "slotfill/corpus.hpp"
#include "slotfill/error.hpp"
#include "slotfill/evalmetrics.hpp"
#include "slotfill/model_io.hpp"
#include "slotfill/pipeline.hpp"
#include "slotfill/ranking.hpp"
#include "slotfill/synthgen.hpp"

namespace slotfill {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write(out);
  if (!out) throw DataError("error writing " + path);
}

ModelFile load_model_path(const std::string& path) {
  auto in = open_in(path);
  return read_model(in);
}

struct TrainArgs {
  std::string model = "usd", input, out;
  int iters = 1000;
  std::uint64_t seed = 0;
  double delta = 0.1, zeta = 10000.0, alpha = 1.0, beta = 1.0, gamma = 0.7;
  std::optional<std::size_t> categories;
  Count min_word_freq = 50, min_slot_freq = 50;
};

struct AnnotateArgs {
  std::string model, queries, out, model_type;
  bool observed = false;
  std::size_t top_t = 1, max_sets = 50000;
  std::optional<double> mu;
  int infer_iters = 100;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

void add_annotate_flags(CLI::App* cmd, AnnotateArgs& a) {
  cmd->add_flag("--observed", a.observed, "Queries carry their candidate slots (observed candidate sets)");
  cmd->add_option("--top-t", a.top_t, "Slots per key and word in candidate pools")->capture_default_str();
  cmd->add_option("--mu", a.mu, "Weight of the candidate-set prior (model-specific default)");
  cmd->add_option("--max-sets", a.max_sets, "Upper bound on enumerated candidate sets")->capture_default_str();
  cmd->add_option("--infer-iters", a.infer_iters, "CUSDSS inference sweeps")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Inference seed (default: the model's training seed)");
  cmd->add_option("--threads", a.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

AnnotateOptions annotate_options(const AnnotateArgs& a, const ModelFile& model) {
  AnnotateOptions o;
  o.observed = a.observed;
  o.top_t = a.top_t;
  o.mu = a.mu;
  o.max_sets = a.max_sets;
  o.infer_iterations = a.infer_iters;
  o.seed = a.seed.value_or(model.seed);
  o.threads = a.threads;
  return o;
}

std::vector<QueryInput> read_queries(const std::string& path) {
  auto in = open_in(path);
  return load_queries(in);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slot filling for e-commerce search queries", "slotfill"};
  app.require_subcommand(1);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a model on engagement data");
  train->add_option("--model", tr.model, "usd|msd|cusd|cusdss")->capture_default_str();
  train->add_option("--input", tr.input, "Engagement JSONL")->required();
  train->add_option("--out", tr.out, "Model file to write")->required();
  train->add_option("--iters", tr.iters, "Gibbs sweeps")->capture_default_str();
  train->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
  train->add_option("--delta", tr.delta, "Emission prior")->capture_default_str();
  train->add_option("--zeta", tr.zeta, "Transition prior (msd)")->capture_default_str();
  train->add_option("--alpha", tr.alpha, "Category prior (cusd, cusdss)")->capture_default_str();
  train->add_option("--beta", tr.beta, "Category-slot prior (cusd, cusdss)")->capture_default_str();
  train->add_option("--num-categories", tr.categories, "Latent categories (default 60 for cusd, 100 for cusdss)");
  train->add_option("--gamma", tr.gamma, "Slot selection probability (cusdss)")->capture_default_str();
  train->add_option("--min-word-freq", tr.min_word_freq, "Drop queries with rarer words")->capture_default_str();
  train->add_option("--min-slot-freq", tr.min_slot_freq, "Drop rarer slots")->capture_default_str();

  AnnotateArgs an;
  auto* annotate = app.add_subcommand("annotate", "Tag query words with slots");
  annotate->add_option("--model", an.model, "Model file")->required();
  annotate->add_option("--queries", an.queries, "Query JSONL")->required();
  annotate->add_option("--out", an.out, "Tags JSONL (default: standard output)");
  annotate->add_option("--model-type", an.model_type, "Fail unless the model file has this type");
  add_annotate_flags(annotate, an);

  AnnotateArgs rk_an;
  std::string rk_catalog, rk_queries, rk_out, rk_mode = "slots", rk_tags;
  Bm25Params bm25;
  auto* rank = app.add_subcommand("rank", "Rank catalog products for each query");
  rank->add_option("--model", rk_an.model, "Model file (not needed for --mode bm25 or with --tags)");
  rank->add_option("--catalog", rk_catalog, "Catalog JSONL")->required();
  rank->add_option("--queries", rk_queries, "Query JSONL")->required();
  rank->add_option("--mode", rk_mode, "slots|bm25|fused")->capture_default_str();
  rank->add_option("--k1", bm25.k1, "BM25 k1")->capture_default_str();
  rank->add_option("--b", bm25.b, "BM25 b")->capture_default_str();
  rank->add_option("--tags", rk_tags, "Use precomputed tags JSONL instead of annotating");
  rank->add_option("--out", rk_out, "Rankings JSONL (default: standard output)");
  add_annotate_flags(rank, rk_an);

  auto* eval = app.add_subcommand("eval", "Evaluate tags or rankings");
  eval->require_subcommand(1);
  std::string ev_pred, ev_gold, ev_out;
  bool ev_by_length = false;
  auto* tagging = eval->add_subcommand("tagging", "Tagging accuracy and per-key scores");
  tagging->add_option("--pred", ev_pred, "Predicted tags JSONL")->required();
  tagging->add_option("--gold", ev_gold, "Gold annotations JSONL")->required();
  tagging->add_flag("--by-length", ev_by_length, "Print the q-accuracy by query length as CSV");
  tagging->add_option("--out", ev_out, "Report file (default: standard output)");
  std::string ev_rankings, ev_judgments;
  std::size_t ev_k = 10;
  auto* retrieval = eval->add_subcommand("retrieval", "MRR and NDCG@k");
  retrieval->add_option("--rankings", ev_rankings, "Rankings JSONL")->required();
  retrieval->add_option("--judgments", ev_judgments, "Judgments JSONL")->required();
  retrieval->add_option("--k", ev_k, "NDCG cutoff")->capture_default_str();
  retrieval->add_option("--out", ev_out, "Report file (default: standard output)");

  std::string sy_config, sy_dir;
  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic corpus");
  synth->add_option("--config", sy_config, "Generator config JSON")->required();
  synth->add_option("--out-dir", sy_dir, "Output directory")->required();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }

    if (*train) {
      TrainOptions o;
      o.type = parse_model_type(tr.model);
      o.iterations = tr.iters;
      o.seed = tr.seed;
      o.hyper = {tr.delta, tr.zeta, tr.alpha, tr.beta, tr.gamma,
                 tr.categories.value_or(o.type == ModelType::kCusdss ? 100 : 60)};
      o.min_word_freq = tr.min_word_freq;
      o.min_slot_freq = tr.min_slot_freq;
      if (tr.categories && *tr.categories < 1) throw UsageError("--num-categories must be >= 1");
      if (!(tr.delta > 0 && tr.zeta > 0 && tr.alpha > 0 && tr.beta > 0)) {
        throw UsageError("priors must be positive");
      }
      auto in = open_in(tr.input);
      const auto corpus = ingest_engagement(in);
      const auto model = train_model(corpus, o);
      emit(tr.out, out, [&](std::ostream& s) { write_model(model, s); });
    } else if (*annotate) {
      const auto model = load_model_path(an.model);
      if (!an.model_type.empty()) require_model_type(model, parse_model_type(an.model_type));
      const auto tags = annotate_queries(model, read_queries(an.queries), annotate_options(an, model));
      emit(an.out, out, [&](std::ostream& s) { write_tags(tags, s); });
    } else if (*rank) {
      const RankMode mode = parse_rank_mode(rk_mode);
      auto cat_in = open_in(rk_catalog);
      const CatalogIndex index(load_catalog(cat_in));
      const auto queries = read_queries(rk_queries);
      std::vector<TaggedQuery> tags;
      if (!rk_tags.empty()) {
        auto tin = open_in(rk_tags);
        tags = load_tags(tin);
        if (tags.size() != queries.size()) {
          throw DataError("--tags has " + std::to_string(tags.size()) + " entries for " +
                          std::to_string(queries.size()) + " queries");
        }
      } else if (mode != RankMode::kBm25) {
        if (rk_an.model.empty()) throw UsageError("--model or --tags is required for --mode " + rk_mode);
        const auto model = load_model_path(rk_an.model);
        tags = annotate_queries(model, queries, annotate_options(rk_an, model));
      }
      std::vector<RankedList> rankings;
      for (std::size_t j = 0; j < queries.size(); ++j) {
        const std::vector<SlotText> none;
        rankings.push_back(rank_products(queries[j].query, tags.empty() ? none : tags[j].slots, index, mode, bm25));
      }
      emit(rk_out, out, [&](std::ostream& s) { write_rankings(rankings, s); });
    } else if (*tagging) {
      auto pin = open_in(ev_pred);
      auto gin = open_in(ev_gold);
      const auto report = tagging_metrics(load_tags(pin), load_gold(gin));
      emit(ev_out, out, [&](std::ostream& s) {
        if (ev_by_length) {
          write_length_csv(report, s);
        } else {
          s << to_json(report).dump(2) << '\n';
        }
      });
    } else if (*retrieval) {
      auto rin = open_in(ev_rankings);
      auto jin = open_in(ev_judgments);
      const auto report = retrieval_metrics(load_rankings(rin), load_judgments(jin), ev_k);
      emit(ev_out, out, [&](std::ostream& s) { s << to_json(report).dump(2) << '\n'; });
    } else if (*synth) {
      auto in = open_in(sy_config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(std::string("synth config: malformed JSON: ") + e.what());
      }
      write_synth(generate(parse_synth_config(j)), sy_dir);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace slotfill
