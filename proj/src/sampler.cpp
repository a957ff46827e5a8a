#include "coldpref/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "coldpref/errors.hpp"

namespace coldpref {

PairPool::PairPool(std::size_t n, std::size_t candidate_pool_factor)
    : n_(n), candidate_factor_(candidate_pool_factor) {
  if (n_ < 2) throw InputError("pair pool needs at least two rows");
  if (candidate_factor_ < 1) throw InputError("candidate_pool_factor must be positive");
}

std::uint64_t PairPool::key(std::size_t u, std::size_t v) const {
  const auto lo = std::min(u, v);
  const auto hi = std::max(u, v);
  return static_cast<std::uint64_t>(lo) * n_ + hi;
}

bool PairPool::is_queried(std::size_t u, std::size_t v) const { return queried_.count(key(u, v)) > 0; }

void PairPool::mark_queried(const std::vector<IndexPair>& pairs) {
  for (const auto& [u, v] : pairs) {
    if (u == v || u >= n_ || v >= n_) throw InputError("invalid pair marked as queried");
    if (!queried_.insert(key(u, v)).second) throw InputError("pair queried twice");
  }
}

QueryBatch sample_random(const PairPool& pool, std::size_t n_b, Rng& rng) {
  const std::size_t remaining = pool.remaining();
  if (n_b > remaining) throw PoolExhausted(n_b, remaining);
  QueryBatch batch;
  batch.strategy = SamplingStrategy::random;
  if (n_b == 0) return batch;

  const std::size_t n = pool.rows();
  auto orient = [&](std::size_t a, std::size_t b) {
    const auto lo = std::min(a, b);
    const auto hi = std::max(a, b);
    return rng.coin() ? IndexPair{lo, hi} : IndexPair{hi, lo};
  };

  batch.pairs.reserve(n_b);
  const bool sparse_draw = 2 * n_b <= remaining && 2 * remaining >= pool.universe();
  if (sparse_draw) {
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(2 * n_b);
    while (batch.pairs.size() < n_b) {
      const std::size_t u = rng.below(n);
      std::size_t v = rng.below(n - 1);
      if (v >= u) ++v;
      const auto lo = std::min(u, v);
      const auto hi = std::max(u, v);
      if (pool.is_queried(lo, hi)) continue;
      if (!chosen.insert(static_cast<std::uint64_t>(lo) * n + hi).second) continue;
      batch.pairs.push_back(orient(lo, hi));
    }
    return batch;
  }

  std::vector<IndexPair> open;
  open.reserve(remaining);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (!pool.is_queried(u, v)) open.emplace_back(u, v);
    }
  }
  for (std::size_t i = 0; i < n_b; ++i) {
    const std::size_t j = i + rng.below(open.size() - i);
    std::swap(open[i], open[j]);
    batch.pairs.push_back(orient(open[i].first, open[i].second));
  }
  return batch;
}

QueryBatch sample_uncertain(const PairPool& pool, std::size_t n_b, const PairEnsemble& model, const Matrix& X,
                            Rng& rng, ScoredCandidates* candidates) {
  const std::size_t remaining = pool.remaining();
  if (n_b > remaining) throw PoolExhausted(n_b, remaining);
  const std::size_t count = std::min(pool.candidate_pool_factor() * n_b, remaining);
  QueryBatch drawn = sample_random(pool, count, rng);

  const Matrix Z = make_pair_features(X, drawn.pairs);
  const Vector raw = model.raw_scores(Z);
  std::vector<double> probs(drawn.pairs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = sigmoid(raw(static_cast<Eigen::Index>(i)));

  std::vector<std::size_t> order(drawn.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return uncertainty(probs[a]) > uncertainty(probs[b]); });

  QueryBatch batch;
  batch.strategy = SamplingStrategy::uncertainty;
  batch.pairs.reserve(n_b);
  for (std::size_t i = 0; i < n_b; ++i) batch.pairs.push_back(drawn.pairs[order[i]]);
  if (candidates != nullptr) {
    candidates->pairs = std::move(drawn.pairs);
    candidates->probs = std::move(probs);
  }
  return batch;
}

}  // namespace coldpref
