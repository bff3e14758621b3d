#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace slotfill {

using Count = std::int64_t;

/// Dense row-major matrix of doubles. Used for materialized distributions
/// (one row per context, one column per outcome).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dirichlet concentration parameters. Either symmetric (one scalar repeated
/// over `dim` outcomes) or an explicit vector; every entry must be > 0.
class DirichletPrior {
 public:
  DirichletPrior() = default;
  explicit DirichletPrior(std::vector<double> concentration);
  static DirichletPrior symmetric(std::size_t dim, double concentration);

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t i) const { return values_.empty() ? scalar_ : values_[i]; }
  double total() const { return total_; }
  bool is_symmetric() const { return values_.empty(); }

 private:
  std::size_t dim_ = 0;
  double scalar_ = 0.0;
  double total_ = 0.0;
  std::vector<double> values_;
};

/// Posterior mean of a categorical with a Dirichlet prior:
/// x_i = (lambda_i + n_i) / sum_j (lambda_j + n_j).
std::vector<double> posterior_mean(const DirichletPrior& prior, std::span<const Count> counts);

/// Non-negative integer contingency table with cached row totals.
///
/// Decrementing a cell below zero throws std::logic_error; it always means a
/// bookkeeping bug in the caller, so it is never clamped.
class CountTable {
 public:
  CountTable() = default;
  CountTable(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Count at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  Count row_total(std::size_t r) const { return row_totals_[r]; }
  Count grand_total() const;
  std::span<const Count> row(std::size_t r) const { return {cells_.data() + r * cols_, cols_}; }

  void increment(std::size_t r, std::size_t c, Count by = 1);
  void decrement(std::size_t r, std::size_t c, Count by = 1);
  /// Overwrites a cell; `value` must be non-negative.
  void set(std::size_t r, std::size_t c, Count value);

  /// Recomputes every row total from the cells and compares with the cache.
  bool audit() const;

  bool operator==(const CountTable&) const = default;

 private:
  void check_index(std::size_t r, std::size_t c) const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Count> cells_;
  std::vector<Count> row_totals_;
};

/// Seeded pseudo-random stream (mt19937_64).
///
/// Child streams are derived from the seed and a stream id only, never from
/// the parent's current position, so `child(k)` is the same regardless of how
/// many draws the parent has made.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1) built from the top 53 bits of one engine call.
  double uniform();
  /// Uniform index in [0, n); consumes one uniform draw.
  std::size_t uniform_index(std::size_t n);
  RandomSource child(std::uint64_t stream) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Draws index i with probability weights[i] / sum(weights) using exactly one
/// uniform draw. Throws UsageError on negative, non-finite or all-zero weights.
std::size_t sample_index(std::span<const double> weights, RandomSource& rng);

/// log(sum(exp(x))) via shift-by-max. Throws UsageError when every entry is -inf.
double log_sum_exp(std::span<const double> log_weights);

/// Exponentiates and normalizes log-space weights (shift-by-max).
std::vector<double> normalize_log(std::span<const double> log_weights);

/// Samples directly from log-space weights.
std::size_t sample_log_index(std::span<const double> log_weights, RandomSource& rng);

/// Index of the maximum entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace slotfill
