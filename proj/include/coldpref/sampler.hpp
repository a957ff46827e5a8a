#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coldpref/pair_model.hpp"
#include "coldpref/rng.hpp"
#include "coldpref/types.hpp"

namespace coldpref {

using IndexPair = std::pair<std::size_t, std::size_t>;

// All unordered pairs over n rows minus those already sent to the oracle.
class PairPool {
 public:
  explicit PairPool(std::size_t n, std::size_t candidate_pool_factor = 20);

  std::size_t rows() const { return n_; }
  std::size_t candidate_pool_factor() const { return candidate_factor_; }
  std::size_t universe() const { return n_ < 2 ? 0 : n_ * (n_ - 1) / 2; }
  std::size_t remaining() const { return universe() - queried_.size(); }

  bool is_queried(std::size_t u, std::size_t v) const;
  // Marks every pair of the batch as queried. Re-marking is an error.
  void mark_queried(const std::vector<IndexPair>& pairs);

 private:
  std::uint64_t key(std::size_t u, std::size_t v) const;

  std::size_t n_;
  std::size_t candidate_factor_;
  std::unordered_set<std::uint64_t> queried_;
};

enum class SamplingStrategy { random, uncertainty };

struct QueryBatch {
  std::vector<IndexPair> pairs;
  SamplingStrategy strategy = SamplingStrategy::random;
};

// n_b unordered pairs uniformly without replacement from the unqueried pairs,
// each oriented by a fair coin. Throws PoolExhausted when too few remain.
QueryBatch sample_random(const PairPool& pool, std::size_t n_b, Rng& rng);

// 1 - |2 prob - 1|: 1 at prob 0.5, 0 at certainty.
inline double uncertainty(double prob) { return 1.0 - std::abs(2.0 * prob - 1.0); }

// Candidate pairs with their model probabilities, in draw order.
struct ScoredCandidates {
  std::vector<IndexPair> pairs;
  std::vector<double> probs;
};

// Draws min(factor * n_b, remaining) random candidates (the first use of `rng`,
// identical to sample_random with that count), scores them with the model and
// keeps the n_b most uncertain. Ties keep the random draw order.
QueryBatch sample_uncertain(const PairPool& pool, std::size_t n_b, const PairEnsemble& model, const Matrix& X,
                            Rng& rng, ScoredCandidates* candidates = nullptr);

}  // namespace coldpref
