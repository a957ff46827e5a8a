#include "coldpref/pair_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "coldpref/errors.hpp"

namespace coldpref {

namespace {

constexpr const char* kMagic = "coldpref-pair-ensemble";
constexpr int kFormatVersion = 1;
constexpr double kProbClamp = 1e-6;

std::string hex(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  return buffer;
}

double parse_hex(const std::string& text) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw InputError("malformed number in model file: " + text);
  return value;
}

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t count = 0;
};

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct ScanState {
  NodeStats left;
  double last_value = 0.0;
};

double leaf_weight(const NodeStats& stats, double lambda) { return -stats.grad / (stats.hess + lambda); }

double score(double grad, double hess, double lambda) { return grad * grad / (hess + lambda); }

// Exact greedy, level-wise growth. On return `node_of` holds the leaf index of
// every sample, so the caller can update its raw scores without re-walking.
RegressionTree grow_tree(const Matrix& Z, const std::vector<std::vector<std::uint32_t>>& sorted,
                         const std::vector<double>& grad, const std::vector<double>& hess,
                         const LearnerConfig& config, std::vector<int>& node_of) {
  const std::size_t m = grad.size();
  const double lambda = config.l2_lambda;
  std::vector<TreeNode> nodes(1);
  std::vector<int> frontier{0};
  node_of.assign(m, 0);

  for (int depth = 0; !frontier.empty(); ++depth) {
    std::vector<int> slot_of(nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

    std::vector<NodeStats> totals(frontier.size());
    for (std::size_t i = 0; i < m; ++i) {
      const int slot = slot_of[static_cast<std::size_t>(node_of[i])];
      if (slot < 0) continue;
      auto& t = totals[static_cast<std::size_t>(slot)];
      t.grad += grad[i];
      t.hess += hess[i];
      ++t.count;
    }

    std::vector<Split> best(frontier.size());
    if (depth < config.max_depth) {
      for (std::size_t f = 0; f < sorted.size(); ++f) {
        std::vector<ScanState> scan(frontier.size());
        for (const std::uint32_t i : sorted[f]) {
          const int slot = slot_of[static_cast<std::size_t>(node_of[i])];
          if (slot < 0) continue;
          auto& state = scan[static_cast<std::size_t>(slot)];
          const auto& total = totals[static_cast<std::size_t>(slot)];
          const double value = Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
          if (state.left.count > 0 && value > state.last_value) {
            const std::size_t right_count = total.count - state.left.count;
            if (state.left.count >= config.min_child && right_count >= config.min_child) {
              const double right_grad = total.grad - state.left.grad;
              const double right_hess = total.hess - state.left.hess;
              const double gain = 0.5 * (score(state.left.grad, state.left.hess, lambda) +
                                         score(right_grad, right_hess, lambda) -
                                         score(total.grad, total.hess, lambda));
              auto& candidate = best[static_cast<std::size_t>(slot)];
              // Strict comparison keeps the lowest feature, then lowest threshold.
              if (gain > candidate.gain) {
                double threshold = 0.5 * (state.last_value + value);
                if (!(threshold > state.last_value)) threshold = value;
                candidate = {gain, static_cast<int>(f), threshold};
              }
            }
          }
          state.left.grad += grad[i];
          state.left.hess += hess[i];
          ++state.left.count;
          state.last_value = value;
        }
      }
    }

    std::vector<int> next_frontier;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const auto index = static_cast<std::size_t>(frontier[s]);
      if (best[s].feature < 0) {
        nodes[index].weight = leaf_weight(totals[s], lambda);
        continue;
      }
      const int left = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      nodes[index].feature = best[s].feature;
      nodes[index].threshold = best[s].threshold;
      nodes[index].left = left;
      nodes[index].right = left + 1;
      next_frontier.push_back(left);
      next_frontier.push_back(left + 1);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const auto& node = nodes[static_cast<std::size_t>(node_of[i])];
      if (node.is_leaf()) continue;
      const double value = Z(static_cast<Eigen::Index>(i), node.feature);
      node_of[i] = value < node.threshold ? node.left : node.right;
    }
    frontier = std::move(next_frontier);
  }
  return RegressionTree(std::move(nodes));
}

}  // namespace

int tree_depth_for(std::size_t p_features) {
  if (p_features < 1) throw InputError("feature count must be positive");
  const long depth = std::lround(std::sqrt(static_cast<double>(p_features)));
  return static_cast<int>(std::max(1L, depth));
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InputError("tree needs at least one node");
}

double RegressionTree::evaluate(std::span<const double> z) const {
  std::size_t index = 0;
  while (!nodes_[index].is_leaf()) {
    const auto& node = nodes_[index];
    index = static_cast<std::size_t>(z[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                                                : node.right);
  }
  return nodes_[index].weight;
}

int RegressionTree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) continue;
    for (int child : {node.left, node.right}) {
      level[static_cast<std::size_t>(child)] = level[i] + 1;
      deepest = std::max(deepest, level[i] + 1);
    }
  }
  return deepest;
}

std::string RegressionTree::serialize() const {
  std::ostringstream out;
  out << "tree " << nodes_.size() << "\n";
  for (const auto& node : nodes_) {
    out << node.feature << ' ' << hex(node.threshold) << ' ' << node.left << ' ' << node.right << ' '
        << hex(node.weight) << "\n";
  }
  return out.str();
}

Matrix make_pair_features(const Matrix& X, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  const auto p = X.cols();
  Matrix Z(static_cast<Eigen::Index>(pairs.size()), 2 * p);
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto [u, v] = pairs[m];
    const auto row = static_cast<Eigen::Index>(m);
    Z.row(row).head(p) = X.row(static_cast<Eigen::Index>(u));
    Z.row(row).tail(p) = X.row(static_cast<Eigen::Index>(v));
  }
  return Z;
}

PairBatch make_pair_batch(const Matrix& X, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                          std::span<const int> labels) {
  if (pairs.size() != labels.size()) throw InputError("pair and label counts differ");
  return PairBatch{make_pair_features(X, pairs), std::vector<int>(labels.begin(), labels.end())};
}

double sigmoid(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

double logistic_loss(const Vector& raw_scores, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    // -log sigmoid(x) for label 1, -log(1 - sigmoid(x)) for label 0.
    const double x = labels[i] == 1 ? raw_scores(static_cast<Eigen::Index>(i))
                                    : -raw_scores(static_cast<Eigen::Index>(i));
    total += std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return total;
}

PairEnsemble::PairEnsemble(LearnerConfig config, std::size_t feature_dim)
    : config_(config), feature_dim_(feature_dim) {
  if (feature_dim_ == 0) throw InputError("pair feature dimension must be positive");
  if (!(config_.learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (!(config_.l2_lambda >= 0.0)) throw InputError("l2_lambda must be nonnegative");
  if (config_.max_depth < 1) throw InputError("max_depth must be positive");
  if (config_.rounds_warmup < 0 || config_.rounds_increment < 0) throw InputError("round counts must be nonnegative");
}

void PairEnsemble::check_batch(const PairBatch& batch) const {
  if (batch.size() == 0) throw InputError("training batch is empty");
  if (static_cast<std::size_t>(batch.features.rows()) != batch.size()) {
    throw InputError("batch feature rows and labels differ");
  }
  if (static_cast<std::size_t>(batch.features.cols()) != feature_dim_) {
    throw InputError("batch has " + std::to_string(batch.features.cols()) + " features, model expects " +
                     std::to_string(feature_dim_));
  }
  for (int label : batch.labels) {
    if (label != 0 && label != 1) throw InputError("labels must be 0 or 1");
  }
}

PairEnsemble PairEnsemble::fit_initial(const PairBatch& batch, const LearnerConfig& config, TrainingTrace* trace) {
  PairEnsemble model(config, static_cast<std::size_t>(batch.features.cols()));
  model.check_batch(batch);
  const double positives = static_cast<double>(std::count(batch.labels.begin(), batch.labels.end(), 1));
  const double q = std::clamp(positives / static_cast<double>(batch.size()), kProbClamp, 1.0 - kProbClamp);
  model.base_logit_ = std::log(q / (1.0 - q));
  const bool single_class = positives == 0.0 || positives == static_cast<double>(batch.size());
  model.boost(batch, single_class ? 0 : config.rounds_warmup, trace);
  return model;
}

void PairEnsemble::update(const PairBatch& batch, TrainingTrace* trace) {
  check_batch(batch);
  boost(batch, config_.rounds_increment, trace);
}

void PairEnsemble::boost(const PairBatch& batch, int rounds, TrainingTrace* trace) {
  const Matrix& Z = batch.features;
  const std::size_t m = batch.size();
  Vector raw = raw_scores(Z);
  if (trace != nullptr) {
    trace->loss.clear();
    trace->loss.push_back(logistic_loss(raw, batch.labels));
  }
  if (rounds == 0) return;

  std::vector<std::vector<std::uint32_t>> sorted(feature_dim_);
  for (std::size_t f = 0; f < feature_dim_; ++f) {
    auto& order = sorted[f];
    order.resize(m);
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return Z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) <
             Z(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f));
    });
  }

  std::vector<double> grad(m);
  std::vector<double> hess(m);
  std::vector<int> leaf_of;
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < m; ++i) {
      const double prob = sigmoid(raw(static_cast<Eigen::Index>(i)));
      grad[i] = prob - static_cast<double>(batch.labels[i]);
      hess[i] = prob * (1.0 - prob);
    }
    RegressionTree tree = grow_tree(Z, sorted, grad, hess, config_, leaf_of);
    for (std::size_t i = 0; i < m; ++i) {
      raw(static_cast<Eigen::Index>(i)) +=
          config_.learning_rate * tree.nodes()[static_cast<std::size_t>(leaf_of[i])].weight;
    }
    trees_.push_back(std::move(tree));
    if (trace != nullptr) trace->loss.push_back(logistic_loss(raw, batch.labels));
  }
}

double PairEnsemble::raw_score(std::span<const double> z) const {
  if (z.size() != feature_dim_) {
    throw InputError("pair feature has length " + std::to_string(z.size()) + ", model expects " +
                     std::to_string(feature_dim_));
  }
  double raw = base_logit_;
  for (const auto& tree : trees_) raw += config_.learning_rate * tree.evaluate(z);
  return raw;
}

double PairEnsemble::predict_prob(std::span<const double> z) const { return sigmoid(raw_score(z)); }

void PairEnsemble::add_tree_scores(const Matrix& Z, std::size_t first_tree, Vector& raw) const {
  if (static_cast<std::size_t>(Z.cols()) != feature_dim_) throw InputError("pair feature matrix has wrong width");
  if (raw.size() != Z.rows()) throw InputError("score vector length differs from row count");
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const std::span<const double> z(Z.row(i).data(), feature_dim_);
    double value = raw(i);
    for (std::size_t t = first_tree; t < trees_.size(); ++t) value += config_.learning_rate * trees_[t].evaluate(z);
    raw(i) = value;
  }
}

Vector PairEnsemble::raw_scores(const Matrix& Z) const {
  Vector raw = Vector::Constant(Z.rows(), base_logit_);
  add_tree_scores(Z, 0, raw);
  return raw;
}

void PairEnsemble::save(std::ostream& out) const {
  out << kMagic << ' ' << kFormatVersion << "\n";
  out << "feature_dim " << feature_dim_ << "\n";
  out << "learning_rate " << hex(config_.learning_rate) << "\n";
  out << "l2_lambda " << hex(config_.l2_lambda) << "\n";
  out << "max_depth " << config_.max_depth << "\n";
  out << "min_child " << config_.min_child << "\n";
  out << "rounds_warmup " << config_.rounds_warmup << "\n";
  out << "rounds_increment " << config_.rounds_increment << "\n";
  out << "base_logit " << hex(base_logit_) << "\n";
  out << "trees " << trees_.size() << "\n";
  for (const auto& tree : trees_) out << tree.serialize();
}

PairEnsemble PairEnsemble::load(std::istream& in) {
  auto expect = [&](const std::string& key) {
    std::string word;
    if (!(in >> word) || word != key) throw InputError("model file: expected '" + key + "'");
  };
  auto read_hex = [&]() {
    std::string word;
    if (!(in >> word)) throw InputError("model file truncated");
    return parse_hex(word);
  };
  int version = 0;
  expect(kMagic);
  if (!(in >> version) || version != kFormatVersion) throw InputError("model file: unsupported version");

  LearnerConfig config;
  std::size_t feature_dim = 0;
  expect("feature_dim");
  in >> feature_dim;
  expect("learning_rate");
  config.learning_rate = read_hex();
  expect("l2_lambda");
  config.l2_lambda = read_hex();
  expect("max_depth");
  in >> config.max_depth;
  expect("min_child");
  in >> config.min_child;
  expect("rounds_warmup");
  in >> config.rounds_warmup;
  expect("rounds_increment");
  in >> config.rounds_increment;
  expect("base_logit");
  const double base_logit = read_hex();
  std::size_t tree_count = 0;
  expect("trees");
  if (!(in >> tree_count)) throw InputError("model file truncated");

  PairEnsemble model(config, feature_dim);
  model.base_logit_ = base_logit;
  model.trees_.reserve(tree_count);
  for (std::size_t t = 0; t < tree_count; ++t) {
    std::size_t node_count = 0;
    expect("tree");
    if (!(in >> node_count) || node_count == 0) throw InputError("model file: bad tree header");
    std::vector<TreeNode> nodes(node_count);
    for (auto& node : nodes) {
      if (!(in >> node.feature)) throw InputError("model file truncated");
      node.threshold = read_hex();
      in >> node.left >> node.right;
      node.weight = read_hex();
      if (!in) throw InputError("model file truncated");
    }
    for (const auto& node : nodes) {
      if (node.is_leaf()) continue;
      const auto limit = static_cast<int>(node_count);
      if (node.left <= 0 || node.left >= limit || node.right <= 0 || node.right >= limit ||
          static_cast<std::size_t>(node.feature) >= feature_dim) {
        throw InputError("model file: tree references invalid node or feature");
      }
    }
    model.trees_.emplace_back(std::move(nodes));
  }
  return model;
}

}  // namespace coldpref
