#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coldpref/types.hpp"

namespace coldpref {

struct LearnerConfig {
  double learning_rate = 0.1;
  double l2_lambda = 1.0;
  int max_depth = 3;
  std::size_t min_child = 1;  // minimum samples per child of a split
  int rounds_warmup = 500;
  int rounds_increment = 25;
};

// round(sqrt(p)) with halves rounded away from zero, at least 1.
int tree_depth_for(std::size_t p_features);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaves only

  bool is_leaf() const { return feature < 0; }
};

// Binary regression tree; a sample goes left when z[feature] < threshold.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double evaluate(std::span<const double> z) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;

  std::string serialize() const;

 private:
  std::vector<TreeNode> nodes_;
};

// Concatenated pair features [x_u ; x_v] with binary labels.
struct PairBatch {
  Matrix features;  // m x 2p
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

PairBatch make_pair_batch(const Matrix& X, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                          std::span<const int> labels);
Matrix make_pair_features(const Matrix& X, std::span<const std::pair<std::size_t, std::size_t>> pairs);

double sigmoid(double raw);

// Summed binary cross-entropy of labels under raw scores.
double logistic_loss(const Vector& raw_scores, std::span<const int> labels);

// Loss on the fitting batch before the first round and after each round.
struct TrainingTrace {
  std::vector<double> loss;
};

// Additive ensemble of regression trees over pair features trained on the
// logistic loss with second-order (gradient/hessian) leaf weights.
class PairEnsemble {
 public:
  // Blank model: no trees, base logit 0, predicts 0.5 everywhere.
  PairEnsemble(LearnerConfig config, std::size_t feature_dim);

  // Base logit from the label mean, then rounds_warmup boosting rounds.
  // A single-class batch yields a base-logit-only model.
  static PairEnsemble fit_initial(const PairBatch& batch, const LearnerConfig& config,
                                  TrainingTrace* trace = nullptr);

  // Appends rounds_increment trees fitted on `batch` only, starting from the
  // current ensemble's predictions. Existing trees are left untouched.
  void update(const PairBatch& batch, TrainingTrace* trace = nullptr);

  double raw_score(std::span<const double> z) const;
  double predict_prob(std::span<const double> z) const;

  // Adds the contribution of trees [first_tree, size) to `raw` row by row.
  // Starting from base_logit() and first_tree = 0 reproduces raw_score exactly.
  void add_tree_scores(const Matrix& Z, std::size_t first_tree, Vector& raw) const;
  Vector raw_scores(const Matrix& Z) const;

  std::size_t feature_dim() const { return feature_dim_; }
  double base_logit() const { return base_logit_; }
  const LearnerConfig& config() const { return config_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  void save(std::ostream& out) const;
  static PairEnsemble load(std::istream& in);

 private:
  void boost(const PairBatch& batch, int rounds, TrainingTrace* trace);
  void check_batch(const PairBatch& batch) const;

  LearnerConfig config_;
  std::size_t feature_dim_;
  double base_logit_ = 0.0;
  std::vector<RegressionTree> trees_;
};

}  // namespace coldpref
