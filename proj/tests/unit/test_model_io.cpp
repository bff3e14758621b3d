#include <doctest.h>

#include <sstream>

#include "../support/fixtures.hpp"
#include "slotfill/error.hpp"
#include "slotfill/model_io.hpp"

using namespace slotfill;
using nlohmann::json;

namespace {

Corpus small_corpus() {
  RandomSource rng(71);
  return slotfill::testing::random_toy_corpus(rng, 15, 6, 4, 3);
}

ModelFile round_trip(const ModelFile& m) {
  std::ostringstream out;
  write_model(m, out);
  std::istringstream in(out.str());
  return read_model(in);
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      if (a(r, c) != b(r, c)) return false;
  return true;
}

std::vector<ModelFile> trained_models() {
  auto corpus = small_corpus();
  RandomSource r1(1), r2(2), r3(3), r4(4);
  return {model_file(corpus.registry, usd_train(corpus, 0.2, 3, r1), 1, 3),
          model_file(corpus.registry, msd_train(corpus, 0.2, 5.0, 3, r2), 2, 3),
          model_file(corpus.registry, cusd_train(corpus, CusdHyper{3, 0.5, 0.7, 0.2}, 3, r3), 3, 3),
          model_file(corpus.registry, cusdss_train(corpus, CusdssHyper{2, 0.5, 0.7, 0.6, 0.2}, 3, r4), 4, 3)};
}

}  // namespace

TEST_CASE("model type names") {
  for (auto t : {ModelType::kUsd, ModelType::kMsd, ModelType::kCusd, ModelType::kCusdss}) {
    CHECK(parse_model_type(model_type_name(t)) == t);
  }
  CHECK_THROWS_AS(parse_model_type("lda"), UsageError);
}

TEST_CASE("every model type round-trips") {
  for (const auto& m : trained_models()) {
    CAPTURE(model_type_name(m.type));
    auto back = round_trip(m);
    CHECK(save_model(back) == save_model(m));
    CHECK(back.type == m.type);
    CHECK(back.registry == m.registry);
    CHECK(back.emission.counts == m.emission.counts);
    CHECK(back.seed == m.seed);
    CHECK(back.iterations == 3);
    CHECK(same_matrix(back.usd().psi, m.usd().psi));
    switch (m.type) {
      case ModelType::kMsd:
        CHECK(back.hyper.zeta == 5.0);
        CHECK(same_matrix(back.msd().upsilon, m.msd().upsilon));
        break;
      case ModelType::kCusd:
        CHECK(back.category_counts == m.category_counts);
        CHECK(same_matrix(back.cusd().chi, m.cusd().chi));
        break;
      case ModelType::kCusdss:
        CHECK(back.hyper.gamma == 0.6);
        CHECK(back.category_slots == m.category_slots);
        CHECK(same_matrix(back.cusdss().chi, m.cusdss().chi));
        break;
      case ModelType::kUsd:
        break;
    }
  }
}

TEST_CASE("counts are stored sparsely") {
  auto m = trained_models()[0];
  auto j = save_model(m);
  Count total = 0;
  for (const auto& cell : j["counts"]["emission"]) {
    REQUIRE(cell.size() == 3);
    CHECK(cell[2].get<Count>() > 0);
    total += cell[2].get<Count>();
  }
  CHECK(total == m.emission.counts.grand_total());
  CHECK_FALSE(j["hyperparameters"].contains("gamma"));
}

TEST_CASE("schema violations are data errors") {
  const auto good = save_model(trained_models()[1]);
  auto expect_error = [](json j, const std::string& what) {
    CAPTURE(what);
    CHECK_THROWS_WITH_AS(load_model(j), doctest::Contains("model file"), DataError);
  };
  auto j = good;
  j["format_version"] = 2;
  expect_error(j, "version");
  j = good;
  j["counts"]["emission"][0][2] = -1;
  expect_error(j, "negative count");
  j = good;
  j["counts"]["emission"][0][2] = 1.5;
  expect_error(j, "fractional count");
  j = good;
  j["counts"]["emission"][0][1] = 100000;
  expect_error(j, "column out of range");
  j = good;
  j["counts"]["emission"].push_back(j["counts"]["emission"][0]);
  expect_error(j, "duplicate cell");
  j = good;
  j["model_type"] = "hmm";
  expect_error(j, "unknown type");
  j = good;
  j.erase("counts");
  expect_error(j, "missing counts");
  j = good;
  j["registry"]["slots"][0]["key"] = "brand";
  expect_error(j, "misc not first");
  j = good;
  j["hyperparameters"]["zeta"] = -3;
  expect_error(j, "negative zeta");

  std::istringstream garbage("{not json");
  CHECK_THROWS_AS(read_model(garbage), DataError);
}

TEST_CASE("model type mismatch") {
  auto m = trained_models()[0];
  CHECK_NOTHROW(require_model_type(m, ModelType::kUsd));
  CHECK_THROWS_WITH_AS(require_model_type(m, ModelType::kMsd), doctest::Contains("model type mismatch"),
                       DataError);
}
