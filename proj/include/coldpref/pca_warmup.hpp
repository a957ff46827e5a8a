#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "coldpref/rng.hpp"
#include "coldpref/types.hpp"

namespace coldpref {

// One-component PCA of a column-centered matrix.
struct PcaModel {
  Vector direction;   // unit-norm principal axis, largest |entry| positive
  Vector scores;      // projection of each row on `direction`
  Vector residuals;   // distance of each row to its rank-1 reconstruction
  double residual_variance = 0.0;  // mean squared residual
  double eigenvalue = 0.0;         // top eigenvalue of (1/n) X^T X
  int iterations = 0;              // power iterations performed
  bool used_fallback = false;      // full eigendecomposition was needed
};

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

// Throws DegenerateData when X is all zeros.
PcaModel fit_first_component(const Matrix& X, const PowerIterationOptions& options = {});

struct WarmupParams {
  double k = 10.0;        // [1, 100]
  double alpha = 1e-5;    // [1e-7, 1e-4]
  double epsilon = 1e-6;  // > 0
};

struct WarmupPlan {
  WarmupParams params;
  std::size_t pair_count = 0;          // pseudo-labelled pairs to draw
  std::vector<double> selection_probs; // per-row draw probability
};

// floor(n k / (1 + alpha sigma_r^2)) before any clamping.
std::size_t pretraining_pair_count(std::size_t n, double k, double alpha, double residual_variance);

// Throws InputError when k, alpha or epsilon leave their ranges.
WarmupPlan plan_warmup(const PcaModel& model, std::size_t n, const WarmupParams& params);

// Draws single rows with probability proportional to 1 / (r_i + epsilon).
class ResidualWeightedSampler {
 public:
  explicit ResidualWeightedSampler(std::vector<double> probabilities);

  std::size_t draw(Rng& rng) const;
  // Draw from the distribution renormalized over every row except `excluded`.
  std::size_t draw_excluding(Rng& rng, std::size_t excluded) const;

  std::size_t size() const { return probs_.size(); }

 private:
  std::size_t locate(double mass) const;

  std::vector<double> probs_;
  std::vector<double> cumulative_;  // cumulative_[i] = sum of probs_[0..i]
};

struct PseudoLabeledPair {
  std::size_t u = 0;
  std::size_t v = 0;
  int label = 0;  // 1 iff score(u) > score(v)
};

inline int pseudo_label(double score_u, double score_v) { return score_u > score_v ? 1 : 0; }

std::vector<PseudoLabeledPair> sample_pseudo_pairs(const WarmupPlan& plan, const PcaModel& model,
                                                   std::uint64_t seed);

// Plain-text diagnostics: residual variance, pair count and the heaviest loadings.
std::string describe_warmup(const PcaModel& model, const WarmupPlan& plan,
                            const std::vector<std::string>& feature_names, std::size_t top = 5);

}  // namespace coldpref
