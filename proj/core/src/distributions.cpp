#include "slotfill/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "slotfill/error.hpp"

namespace slotfill {

DirichletPrior::DirichletPrior(std::vector<double> concentration)
    : dim_(concentration.size()), values_(std::move(concentration)) {
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw UsageError("Dirichlet concentration entries must be finite and > 0");
    }
  }
  total_ = std::accumulate(values_.begin(), values_.end(), 0.0);
}

DirichletPrior DirichletPrior::symmetric(std::size_t dim, double concentration) {
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw UsageError("Dirichlet concentration must be finite and > 0, got " +
                     std::to_string(concentration));
  }
  DirichletPrior prior;
  prior.dim_ = dim;
  prior.scalar_ = concentration;
  prior.total_ = concentration * static_cast<double>(dim);
  return prior;
}

std::vector<double> posterior_mean(const DirichletPrior& prior, std::span<const Count> counts) {
  if (prior.dim() != counts.size()) {
    throw UsageError("posterior_mean: prior has dimension " + std::to_string(prior.dim()) +
                     " but counts have " + std::to_string(counts.size()));
  }
  std::vector<double> mean(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    mean[i] = prior[i] + static_cast<double>(counts[i]);
    total += mean[i];
  }
  for (double& x : mean) x /= total;
  return mean;
}

CountTable::CountTable(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), cells_(rows * cols, 0), row_totals_(rows, 0) {}

Count CountTable::grand_total() const {
  return std::accumulate(row_totals_.begin(), row_totals_.end(), Count{0});
}

void CountTable::check_index(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) {
    throw std::out_of_range("CountTable index (" + std::to_string(r) + ", " + std::to_string(c) +
                            ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

void CountTable::increment(std::size_t r, std::size_t c, Count by) {
  check_index(r, c);
  cells_[r * cols_ + c] += by;
  row_totals_[r] += by;
}

void CountTable::decrement(std::size_t r, std::size_t c, Count by) {
  check_index(r, c);
  Count& cell = cells_[r * cols_ + c];
  if (cell < by) {
    throw std::logic_error("CountTable decrement below zero at (" + std::to_string(r) + ", " +
                           std::to_string(c) + ")");
  }
  cell -= by;
  row_totals_[r] -= by;
}

void CountTable::set(std::size_t r, std::size_t c, Count value) {
  check_index(r, c);
  if (value < 0) throw std::logic_error("CountTable cells must be non-negative");
  Count& cell = cells_[r * cols_ + c];
  row_totals_[r] += value - cell;
  cell = value;
}

bool CountTable::audit() const {
  for (std::size_t r = 0; r < rows_; ++r) {
    Count total = 0;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (cells_[r * cols_ + c] < 0) return false;
      total += cells_[r * cols_ + c];
    }
    if (total != row_totals_[r]) return false;
  }
  return true;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RandomSource::uniform_index(std::size_t n) {
  if (n == 0) throw UsageError("uniform_index over an empty range");
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

RandomSource RandomSource::child(std::uint64_t stream) const {
  return RandomSource(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

std::size_t sample_index(std::span<const double> weights, RandomSource& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw UsageError("sample_index: weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw UsageError("sample_index: all weights are zero");

  const double target = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cumulative += weights[i];
    last_positive = i;
    if (target < cumulative) return i;
  }
  // Rounding can leave target == cumulative at the end.
  return last_positive;
}

double log_sum_exp(std::span<const double> log_weights) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw UsageError("log-space weights must be finite or -inf");
    }
    peak = std::max(peak, w);
  }
  if (peak == -std::numeric_limits<double>::infinity()) {
    throw UsageError("log-space weights are all -inf");
  }
  double sum = 0.0;
  for (double w : log_weights) sum += std::exp(w - peak);
  return peak + std::log(sum);
}

std::vector<double> normalize_log(std::span<const double> log_weights) {
  const double norm = log_sum_exp(log_weights);
  std::vector<double> probs(log_weights.size());
  std::transform(log_weights.begin(), log_weights.end(), probs.begin(),
                 [norm](double w) { return std::exp(w - norm); });
  return probs;
}

std::size_t sample_log_index(std::span<const double> log_weights, RandomSource& rng) {
  const auto probs = normalize_log(log_weights);
  return sample_index(probs, rng);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax over an empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace slotfill
