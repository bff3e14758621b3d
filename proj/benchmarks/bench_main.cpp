#include <benchmark/benchmark.h>

#include <sstream>

#include "slotfill/cusdss.hpp"
#include "slotfill/msd.hpp"
#include "slotfill/ranking.hpp"
#include "slotfill/synthgen.hpp"
#include "slotfill/usd.hpp"

namespace {

using namespace slotfill;

struct Fixture {
  SynthOutput synth;
  Corpus corpus;

  Fixture() {
    SynthConfig cfg;
    cfg.queries = 2000;
    synth = generate(cfg);
    std::istringstream in(synth.engagement);
    corpus = ingest_engagement(in);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_UsdSweep(benchmark::State& st) {
  const auto& f = fixture();
  RandomSource rng(1);
  auto state = usd_init(f.corpus, 0.1, rng);
  for (auto _ : st) usd_sweep(state, f.corpus, rng);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.corpus.records.size()));
}
BENCHMARK(BM_UsdSweep)->Unit(benchmark::kMillisecond);

void BM_MsdSweep(benchmark::State& st) {
  const auto& f = fixture();
  RandomSource rng(1);
  auto state = msd_init(f.corpus, 0.1, 0.1, rng);
  for (auto _ : st) msd_sweep(state, f.corpus, rng);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.corpus.records.size()));
}
BENCHMARK(BM_MsdSweep)->Unit(benchmark::kMillisecond);

void BM_CusdssSweep(benchmark::State& st) {
  const auto& f = fixture();
  RandomSource rng(1);
  auto state = cusdss_init(f.corpus, CusdssHyper{static_cast<std::size_t>(st.range(0)), 1.0, 1.0, 0.5, 0.1}, rng);
  for (auto _ : st) {
    for (std::size_t q = 0; q < f.corpus.records.size(); ++q) cusdss_block_update(state, f.corpus, q, rng);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.corpus.records.size()));
}
BENCHMARK(BM_CusdssSweep)->Arg(4)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Viterbi(benchmark::State& st) {
  const auto& f = fixture();
  RandomSource rng(2);
  const MsdModel model(usd_train(f.corpus, 0.1, 20, rng).emission, 0.1,
                       CountTable(f.corpus.registry.num_slots() + 1, f.corpus.registry.num_slots()));
  std::size_t q = 0;
  for (auto _ : st) {
    const auto& rec = f.corpus.records[q++ % f.corpus.records.size()];
    benchmark::DoNotOptimize(viterbi_decode(model.psi, model.upsilon, rec.query, rec.candidates, kMiscSlot));
  }
}
BENCHMARK(BM_Viterbi);

void BM_CusdssInfer(benchmark::State& st) {
  const auto& f = fixture();
  RandomSource rng(3);
  const CusdssHyper h{8, 1.0, 1.0, 0.5, 0.1};
  const CusdssModel model(h, cusdss_train(f.corpus, h, 20, rng).counts);
  std::size_t q = 0;
  for (auto _ : st) {
    const auto& rec = f.corpus.records[q++ % f.corpus.records.size()];
    benchmark::DoNotOptimize(cusdss_infer(model, rec.query, rec.candidates, static_cast<int>(st.range(0)), rng));
  }
}
BENCHMARK(BM_CusdssInfer)->Arg(20)->Arg(100);

void BM_RankFused(benchmark::State& st) {
  const auto& f = fixture();
  std::istringstream in(f.synth.catalog);
  const CatalogIndex index(load_catalog(in));
  const std::vector<SlotText> slots{{"brand", "nike"}};
  for (auto _ : st) benchmark::DoNotOptimize(rank_products("nike running shoes", slots, index, RankMode::kFused));
}
BENCHMARK(BM_RankFused);

}  // namespace

BENCHMARK_MAIN();
