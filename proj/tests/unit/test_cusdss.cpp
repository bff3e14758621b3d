#include <doctest.h>

#include <cmath>
#include <map>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "slotfill/cusdss.hpp"
#include "slotfill/error.hpp"

using namespace slotfill;
using doctest::Approx;

namespace {

CandidateSlotSet set_of(std::initializer_list<SlotId> ids) {
  CandidateSlotSet c;
  for (auto s : ids) c.insert(s);
  return c;
}

EngagementRecord record(std::vector<TermId> terms, CandidateSlotSet c) {
  EngagementRecord r;
  r.query.terms = std::move(terms);
  r.candidates = std::move(c);
  return r;
}

Corpus toy_corpus() {
  // Two records, |M| = 3 (misc, a, b), |V| = 2.
  Corpus corpus;
  corpus.registry.intern_term("x");
  corpus.registry.intern_term("y");
  corpus.registry.intern_slot("ka", "a");
  corpus.registry.intern_slot("kb", "b");
  corpus.records.push_back(record({0, 1}, set_of({0, 1, 2})));
  corpus.records.push_back(record({1}, set_of({0, 2})));
  return corpus;
}

}  // namespace

TEST_CASE("position conditional label-bias fixture") {
  // misc = 0, m0 = 1, m1 = 2; word 0 already uses m0.
  CusdssHyper h{1, 1.0, 1.0, 0.5, 0.1};
  EmissionCounts e(3, 1, 0.1);
  CountTable sel(1, 6);
  auto rec = record({0, 0}, set_of({0, 1, 2}));
  std::vector<SlotId> y{1, 0};
  auto w = cusdss_position_conditional(h, e, sel, rec, y, 1, 0);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == Approx(0.25).epsilon(1e-12));
  CHECK(w[1] == Approx(0.5).epsilon(1e-12));
  CHECK(w[2] == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("position conditional selection odds") {
  CusdssHyper h{1, 1.0, 1.0, 0.7, 0.1};
  EmissionCounts e(3, 1, 0.1);
  CountTable sel(1, 6);
  auto rec = record({0, 0}, set_of({0, 1}));
  std::vector<SlotId> y{1, 1};
  auto w = cusdss_position_conditional(h, e, sel, rec, y, 1, 0);
  // misc is new: odds 0.7 / 0.3 and |a'| = 2; slot 1 keeps |a'| = 1.
  CHECK(w[0] / w[1] == Approx(0.7 / 0.3 / 2.0).epsilon(1e-12));

  // Everything already in use, equal emissions: uniform.
  auto rec3 = record({0, 0, 0}, set_of({0, 1}));
  std::vector<SlotId> y3{0, 1, 0};
  auto u = cusdss_position_conditional(h, e, sel, rec3, y3, 2, 0);
  CHECK(u[0] == Approx(0.5));
}

TEST_CASE("conditionals match joint ratios") {
  RandomSource rng(314);
  for (int trial = 0; trial < 150; ++trial) {
    auto corpus = slotfill::testing::random_toy_corpus(rng);
    CusdssHyper h{1 + rng.uniform_index(2), 0.2 + rng.uniform(), 0.2 + rng.uniform(),
                  0.1 + 0.8 * rng.uniform(), 0.05 + rng.uniform()};
    RandomSource init(rng.uniform_index(1 << 20));
    auto s = cusdss_init(corpus, h, init);
    const std::size_t q = rng.uniform_index(corpus.records.size());
    const auto& rec = corpus.records[q];
    const std::size_t M = corpus.registry.num_slots();
    auto counts = s.counts;
    const std::size_t zq = s.categories[q];
    auto used = used_candidates(rec.candidates, s.assignments[q]);
    --counts.category_counts[zq];
    for (std::size_t j = 0; j < rec.candidates.size(); ++j) {
      const SlotId m = rec.candidates.slots[j];
      counts.selection.decrement(zq, used[j] ? m : rejected_column(m, M));
    }

    auto joint = [&](const std::vector<std::size_t>& z, const std::vector<std::vector<SlotId>>& y) {
      return oracle::cusdss_log_joint(corpus, z, y, h.num_categories, h.alpha, h.beta, h.gamma, h.delta);
    };

    auto cw = cusdss_category_conditional(h, counts.category_counts, counts.selection, rec.candidates, used);
    for (std::size_t a = 1; a < h.num_categories; ++a) {
      auto za = s.categories, z0 = s.categories;
      za[q] = a;
      z0[q] = 0;
      const double expected = std::exp(joint(za, s.assignments) - joint(z0, s.assignments));
      CHECK(std::abs(cw[a] / cw[0] - expected) / expected <= 1e-9);
    }

    const std::size_t i = rng.uniform_index(rec.query.size());
    counts.emission.counts.decrement(s.assignments[q][i], rec.query.terms[i]);
    auto pw = cusdss_position_conditional(h, counts.emission, counts.selection, rec, s.assignments[q], i, zq);
    const auto& cand = rec.candidates.slots;
    for (std::size_t a = 1; a < cand.size(); ++a) {
      auto ya = s.assignments, y0 = s.assignments;
      ya[q][i] = cand[a];
      y0[q][i] = cand[0];
      const double expected = std::exp(joint(s.categories, ya) - joint(s.categories, y0));
      CHECK(std::abs(pw[a] / pw[0] - expected) / expected <= 1e-9);
    }
  }
}

TEST_CASE("block updates keep every invariant") {
  RandomSource gen(2);
  auto corpus = slotfill::testing::random_toy_corpus(gen, 30, 8, 5, 4);
  CusdssHyper h{3, 1.0, 1.0, 0.7, 0.1};
  RandomSource rng(4);
  auto s = cusdss_init(corpus, h, rng);
  const Count words = s.counts.emission.counts.grand_total();
  std::vector<Count> row_totals;
  Count selection_total = s.counts.selection.grand_total();
  for (int sweep = 0; sweep < 20; ++sweep) {
    for (std::size_t q = 0; q < corpus.records.size(); ++q) {
      cusdss_block_update(s, corpus, q, rng);
      const auto used = used_candidates(corpus.records[q].candidates, s.assignments[q]);
      CHECK(std::find(used.begin(), used.end(), true) != used.end());
    }
    CHECK(cusdss_audit(s, corpus));
    CHECK(s.counts.emission.counts.grand_total() == words);
    CHECK(s.counts.selection.grand_total() == selection_total);
  }
}

TEST_CASE("misc-only record is a fixed point with one category") {
  Corpus corpus;
  corpus.registry.intern_term("x");
  corpus.records.push_back(record({0, 0}, set_of({0})));
  RandomSource rng(1);
  auto s = cusdss_train(corpus, CusdssHyper{1, 1.0, 1.0, 0.7, 0.1}, 3, rng);
  CHECK(s.categories[0] == 0);
  CHECK(s.assignments[0] == std::vector<SlotId>{0, 0});
}

TEST_CASE("block Gibbs samples the enumerated joint") {
  auto corpus = toy_corpus();
  CusdssHyper h{2, 1.0, 1.0, 0.7, 0.5};
  auto exact = oracle::cusdss_enumerate(corpus, h.num_categories, h.alpha, h.beta, h.gamma, h.delta);
  RandomSource rng(17);
  auto s = cusdss_init(corpus, h, rng);
  std::map<oracle::CusdssConfiguration, double> seen;
  const int updates = 40000;
  for (int n = 0; n < updates; ++n) {
    const std::size_t q = static_cast<std::size_t>(n) % corpus.records.size();
    cusdss_block_update(s, corpus, q, rng);
    seen[{s.categories, s.assignments}] += 1.0 / updates;
  }
  double tv = 0.0;
  for (const auto& [cfg, p] : exact) {
    auto it = seen.find(cfg);
    tv += std::abs(p - (it == seen.end() ? 0.0 : it->second));
  }
  for (const auto& [cfg, p] : seen) {
    if (!exact.contains(cfg)) tv += p;
  }
  CHECK(tv / 2.0 <= 0.03);
}

TEST_CASE("training is reproducible") {
  RandomSource gen(6);
  auto corpus = slotfill::testing::random_toy_corpus(gen, 20, 6, 4, 3);
  CusdssHyper h{2, 1.0, 1.0, 0.7, 0.1};
  RandomSource a(3), b(3);
  auto sa = cusdss_train(corpus, h, 5, a);
  auto sb = cusdss_train(corpus, h, 5, b);
  CHECK(sa.assignments == sb.assignments);
  CHECK(sa.categories == sb.categories);
  CHECK(sa.counts.selection == sb.counts.selection);
  CHECK_THROWS_AS(cusdss_train(corpus, CusdssHyper{2, 1.0, 1.0, 1.0, 0.1}, 5, a), UsageError);
}

TEST_CASE("a slot that never emits ends up rejected") {
  // "noise" (slot 3) sits in every candidate set but its words are owned by
  // forced single-slot records, so it should be sampled as rejected.
  Corpus corpus;
  const TermId x = corpus.registry.intern_term("x");
  const TermId y = corpus.registry.intern_term("y");
  const SlotId A = corpus.registry.intern_slot("ka", "a");
  const SlotId B = corpus.registry.intern_slot("kb", "b");
  const SlotId N = corpus.registry.intern_slot("noise", "noise");
  for (int r = 0; r < 60; ++r) {
    corpus.records.push_back(record({x, y}, set_of({0, A, B, N})));
    corpus.records.push_back(record({x}, set_of({A})));
    corpus.records.push_back(record({y}, set_of({B})));
  }
  RandomSource rng(9);
  auto s = cusdss_train(corpus, CusdssHyper{1, 1.0, 1.0, 0.7, 0.1}, 60, rng);
  const std::size_t M = corpus.registry.num_slots();
  CHECK(s.counts.selection.at(0, rejected_column(N, M)) > s.counts.selection.at(0, N));
}

TEST_CASE("inference") {
  auto corpus = toy_corpus();
  CusdssHyper h{2, 1.0, 1.0, 0.7, 0.1};
  RandomSource rng(1);
  auto s = cusdss_train(corpus, h, 10, rng);
  CusdssModel model(h, s.counts);
  const auto before = model.counts;

  RandomSource r(2);
  auto single = cusdss_infer(model, Query{{0, 1}}, set_of({2}), 5, r);
  CHECK(single.slots == std::vector<SlotId>{2, 2});
  CHECK(single.selected == std::vector<bool>{true});

  RandomSource r0(3), r1(3);
  auto zero = cusdss_infer(model, Query{{0, 1, 0}}, set_of({0, 1, 2}), 0, r0);
  auto one = cusdss_infer(model, Query{{0, 1, 0}}, set_of({0, 1, 2}), 1, r1);
  CHECK(zero.slots == one.slots);

  RandomSource ro(4);
  auto oov = cusdss_infer(model, Query{{kUnknownTerm, 1}}, set_of({0, 1, 2}), 5, ro);
  CHECK(oov.slots[0] == kMiscSlot);

  CHECK(model.counts.selection == before.selection);
  CHECK(model.counts.emission.counts == before.emission.counts);
  CHECK(model.counts.category_counts == before.category_counts);
}

TEST_CASE("inference follows sharp emissions") {
  // Slot 1 owns "x", slot 2 owns "y", both always selected together.
  Corpus corpus;
  corpus.registry.intern_term("x");
  corpus.registry.intern_term("y");
  corpus.registry.intern_slot("ka", "a");
  corpus.registry.intern_slot("kb", "b");
  for (int r = 0; r < 40; ++r) {
    corpus.records.push_back(record({0}, set_of({1})));
    corpus.records.push_back(record({1}, set_of({2})));
    corpus.records.push_back(record({0, 1}, set_of({1, 2})));
  }
  CusdssHyper h{1, 1.0, 1.0, 0.7, 0.01};
  RandomSource rng(5);
  CusdssModel model(h, cusdss_train(corpus, h, 20, rng).counts);
  RandomSource r(6);
  auto out = cusdss_infer(model, Query{{0, 1}}, set_of({0, 1, 2}), 50, r);
  CHECK(out.slots == std::vector<SlotId>{1, 2});
}

TEST_CASE("set prior and selection") {
  auto corpus = toy_corpus();
  CusdssHyper h{2, 1.0, 1.0, 0.7, 0.1};
  RandomSource rng(1);
  CusdssModel model(h, cusdss_train(corpus, h, 10, rng).counts);
  const std::size_t M = model.num_slots();

  CusdssInference inf;
  inf.category = 1;
  inf.slots = {2};
  inf.selected = {false, true};
  const double neg = model.chi(1, rejected_column(0, M));
  const double base = std::log(model.phi[1]) + std::log(model.chi(1, 2));
  CHECK(cusdss_set_log_prior(model, set_of({0, 2}), inf, RejectedTerm::kOneMinusNegated) ==
        Approx(base + std::log(1.0 - neg)).epsilon(1e-12));
  CHECK(cusdss_set_log_prior(model, set_of({0, 2}), inf, RejectedTerm::kNegated) ==
        Approx(base + std::log(neg)).epsilon(1e-12));

  Query q{{0, 1}};
  RandomSource a(7), b(7);
  auto sel = cusdss_select(model, q, {set_of({0, 1, 2})}, 0.0, 10, a);
  auto child = b.child(0);
  CHECK(sel.slots == cusdss_infer(model, q, set_of({0, 1, 2}), 10, child).slots);
  CHECK(sel.set_index == 0);
  RandomSource c(7);
  CHECK_THROWS_AS(cusdss_select(model, q, {}, 0.0, 10, c), UsageError);
}
