#include "slotfill/msd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slotfill/error.hpp"

namespace slotfill {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void add_transitions(CountTable& transitions, const std::vector<SlotId>& y, std::size_t start) {
  std::size_t prev = start;
  for (SlotId m : y) {
    transitions.increment(prev, m);
    prev = m;
  }
}

}  // namespace

MsdModel::MsdModel(EmissionCounts counts, double zeta_, CountTable transitions_)
    : emission(std::move(counts)),
      zeta(zeta_),
      transitions(std::move(transitions_)),
      psi(emission.posterior()),
      upsilon(transition_posterior(transitions, zeta)) {}

Matrix transition_posterior(const CountTable& transitions, double zeta) {
  const auto prior = DirichletPrior::symmetric(transitions.cols(), zeta);
  Matrix upsilon(transitions.rows(), transitions.cols());
  for (std::size_t r = 0; r < transitions.rows(); ++r) {
    const auto row = posterior_mean(prior, transitions.row(r));
    std::copy(row.begin(), row.end(), upsilon.row(r).begin());
  }
  return upsilon;
}

Matrix uniform_transitions(std::size_t num_slots) {
  return Matrix(num_slots + 1, num_slots, 1.0 / static_cast<double>(num_slots));
}

MsdState msd_init(const Corpus& corpus, double delta, double zeta, RandomSource& rng) {
  MsdState state;
  state.tagging = usd_init(corpus, delta, rng);
  state.zeta = zeta;
  const std::size_t m = corpus.registry.num_slots();
  state.transitions = CountTable(m + 1, m);
  for (const auto& y : state.tagging.assignments) add_transitions(state.transitions, y, m);
  state.upsilon = transition_posterior(state.transitions, zeta);
  return state;
}

std::vector<double> msd_conditional(const MsdState& state, const Corpus& corpus, std::size_t q,
                                    std::size_t i) {
  const auto& rec = corpus.records.at(q);
  const auto& y = state.tagging.assignments.at(q);
  const auto& upsilon = state.upsilon;
  const std::size_t prev = i == 0 ? start_row(upsilon) : y[i - 1];
  const bool has_next = i + 1 < y.size();
  const TermId v = rec.query.terms[i];

  const auto& cands = rec.candidates.slots;
  std::vector<double> log_w(cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j) {
    const SlotId m = cands[j];
    double w = std::log(upsilon(prev, m)) + state.tagging.emission.log_weight(m, v);
    if (has_next) w += std::log(upsilon(m, y[i + 1]));
    log_w[j] = w;
  }
  return normalize_log(log_w);
}

void msd_sweep(MsdState& state, const Corpus& corpus, RandomSource& rng) {
  auto& counts = state.tagging.emission.counts;
  const std::size_t start = start_row(state.upsilon);
  for (std::size_t q = 0; q < corpus.records.size(); ++q) {
    const auto& rec = corpus.records[q];
    auto& y = state.tagging.assignments[q];
    const auto& cands = rec.candidates.slots;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const TermId v = rec.query.terms[i];
      const std::size_t prev = i == 0 ? start : y[i - 1];
      const bool has_next = i + 1 < y.size();
      counts.decrement(y[i], v);
      state.transitions.decrement(prev, y[i]);
      if (has_next) state.transitions.decrement(y[i], y[i + 1]);

      if (cands.size() == 1) {
        y[i] = cands[0];
      } else {
        const auto probs = msd_conditional(state, corpus, q, i);
        y[i] = cands[sample_index(probs, rng)];
      }

      counts.increment(y[i], v);
      state.transitions.increment(prev, y[i]);
      if (has_next) state.transitions.increment(y[i], y[i + 1]);
    }
  }
  state.upsilon = transition_posterior(state.transitions, state.zeta);
}

MsdState msd_train(const Corpus& corpus, double delta, double zeta, int iterations,
                   RandomSource& rng) {
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  auto words = rng.child(kWordStream);
  auto state = msd_init(corpus, delta, zeta, words);
  for (int it = 0; it < iterations; ++it) msd_sweep(state, corpus, words);
  return state;
}

bool msd_audit(const MsdState& state, const Corpus& corpus) {
  if (!usd_audit(state.tagging, corpus)) return false;
  const std::size_t m = corpus.registry.num_slots();
  CountTable expected(m + 1, m);
  for (const auto& y : state.tagging.assignments) add_transitions(expected, y, m);
  return state.transitions.audit() && expected == state.transitions;
}

Decoding viterbi_decode(const Matrix& psi, const Matrix& upsilon, const Query& query,
                        const CandidateSlotSet& candidates, SlotId misc) {
  const auto& c = candidates.slots;
  const std::size_t n = c.size();
  const std::size_t len = query.size();
  if (n == 0) throw UsageError("empty candidate set");
  if (len == 0) return {};

  // Restricted, renormalized transition logs; row n is START.
  const std::size_t start = start_row(upsilon);
  Matrix log_trans(n + 1, n);
  for (std::size_t p = 0; p <= n; ++p) {
    const std::size_t from = p == n ? start : c[p];
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += upsilon(from, c[j]);
    for (std::size_t j = 0; j < n; ++j) log_trans(p, j) = std::log(upsilon(from, c[j]) / denom);
  }
  Matrix log_emit(len, n);
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_emit(i, j) = log_emission(psi, c[j], query.terms[i], misc);
  }

  // delta(i, j): best forward-accumulated score of words 0..i ending in
  // candidate j. Floating-point addition is monotone, so this is exactly the
  // maximum over prefixes of `s += log_trans; s += log_emit`.
  Matrix delta(len, n);
  for (std::size_t j = 0; j < n; ++j) delta(0, j) = log_trans(n, j) + log_emit(0, j);
  for (std::size_t i = 1; i < len; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      for (std::size_t k = 0; k < n; ++k) best = std::max(best, delta(i - 1, k) + log_trans(k, j) + log_emit(i, j));
      delta(i, j) = best;
    }
  }
  const double optimum = *std::max_element(delta.row(len - 1).begin(), delta.row(len - 1).end());
  auto tight = [&](std::size_t i, std::size_t k, std::size_t j) {
    return delta(i - 1, k) + log_trans(k, j) + log_emit(i, j) == delta(i, j);
  };

  // on_path(i, j): some optimal path passes through candidate j at word i
  // using only tight steps.
  std::vector<std::vector<char>> on_path(len, std::vector<char>(n, 0));
  for (std::size_t j = 0; j < n; ++j) on_path[len - 1][j] = delta(len - 1, j) == optimum;
  for (std::size_t i = len - 1; i-- > 0;) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n && !on_path[i][k]; ++j) on_path[i][k] = on_path[i + 1][j] && tight(i + 1, k, j);
    }
  }

  // Lowest index first along tight steps: the lexicographically smallest
  // optimal path.
  Decoding out;
  out.path.reserve(len);
  std::size_t prev = n;
  for (std::size_t i = 0; i < len; ++i) {
    std::size_t pick = 0;
    while (!(on_path[i][pick] && (i == 0 || tight(i, prev, pick)))) ++pick;
    out.log_score += log_trans(prev, pick);
    out.log_score += log_emit(i, pick);
    out.path.push_back(c[pick]);
    prev = pick;
  }
  return out;
}

Selection msd_select(const Matrix& psi, const Matrix& upsilon, const Query& query,
                     const std::vector<CandidateSlotSet>& candidate_sets, double mu, SlotId misc) {
  if (candidate_sets.empty()) throw UsageError("no candidate sets to select from");
  Selection best;
  for (std::size_t s = 0; s < candidate_sets.size(); ++s) {
    auto decoded = viterbi_decode(psi, upsilon, query, candidate_sets[s], misc);
    double score = decoded.log_score;
    if (mu != 0.0) {
      double co_occurrence = 0.0;
      for (std::size_t i = 0; i + 1 < decoded.path.size(); ++i) {
        co_occurrence += std::log(upsilon(decoded.path[i], decoded.path[i + 1]));
      }
      score += mu * co_occurrence;
    }
    if (s == 0 || score > best.score) {
      best.score = score;
      best.set_index = s;
      best.slots = std::move(decoded.path);
    }
  }
  return best;
}

}  // namespace slotfill
