#include "coldpref/pca_warmup.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "coldpref/csv.hpp"
#include "coldpref/errors.hpp"

namespace coldpref {

namespace {

constexpr double kCenteringTolerance = 1e-6;

// Largest |entry| positive; near-equal magnitudes resolve to the lowest index.
void canonicalize_sign(Vector& w) {
  Eigen::Index pivot = 0;
  double best = std::abs(w(0));
  for (Eigen::Index j = 1; j < w.size(); ++j) {
    const double magnitude = std::abs(w(j));
    if (magnitude > best * (1.0 + 1e-12) + 1e-300) {
      best = magnitude;
      pivot = j;
    }
  }
  if (w(pivot) < 0.0) w = -w;
}

Vector full_eigendecomposition(const Matrix& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw DegenerateData("eigendecomposition failed");
  // Eigenvalues are ascending.
  return solver.eigenvectors().col(covariance.cols() - 1);
}

}  // namespace

PcaModel fit_first_component(const Matrix& X, const PowerIterationOptions& options) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (n < 3) throw InputError("PCA needs at least 3 rows");
  if (p < 1) throw InputError("PCA needs at least 1 column");
  const Vector means = X.colwise().mean().transpose();
  if (means.cwiseAbs().maxCoeff() > kCenteringTolerance) {
    throw InputError("PCA input must be column-centered");
  }

  const Matrix covariance = (X.transpose() * X) / static_cast<double>(n);
  const double max_diagonal = covariance.diagonal().maxCoeff();
  if (!(max_diagonal > 0.0)) throw DegenerateData("degenerate data: all features are zero");

  PcaModel model;
  Vector w = Vector::Ones(p);
  w(0) += 0.5;
  w.normalize();
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    Vector next = covariance * w;
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    model.iterations = it + 1;
    const double change = (next - w).norm();
    w = std::move(next);
    if (change < options.tolerance) {
      converged = true;
      break;
    }
  }
  double eigenvalue = w.dot(covariance * w);
  // The top eigenvalue bounds every diagonal entry; anything less means the
  // start vector was orthogonal to the top eigenspace.
  if (!converged || eigenvalue < max_diagonal * (1.0 - 1e-12)) {
    w = full_eigendecomposition(covariance);
    eigenvalue = w.dot(covariance * w);
    model.used_fallback = true;
  }
  if (!(eigenvalue > 0.0)) throw DegenerateData("degenerate data: top eigenvalue is zero");
  w.normalize();
  canonicalize_sign(w);

  model.direction = w;
  model.eigenvalue = eigenvalue;
  model.scores = X * w;
  model.residuals.resize(n);
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (X.row(i).transpose() - model.scores(i) * w).norm();
    model.residuals(i) = r;
    sum_sq += r * r;
  }
  model.residual_variance = sum_sq / static_cast<double>(n);
  return model;
}

std::size_t pretraining_pair_count(std::size_t n, double k, double alpha, double residual_variance) {
  const double raw = static_cast<double>(n) * k / (1.0 + alpha * residual_variance);
  return static_cast<std::size_t>(std::floor(raw));
}

WarmupPlan plan_warmup(const PcaModel& model, std::size_t n, const WarmupParams& params) {
  if (!(params.k >= 1.0 && params.k <= 100.0)) throw InputError("k must lie in [1, 100]");
  if (!(params.alpha >= 1e-7 && params.alpha <= 1e-4)) throw InputError("alpha must lie in [1e-7, 1e-4]");
  if (!(params.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (static_cast<std::size_t>(model.residuals.size()) != n) {
    throw InputError("PCA model row count does not match n");
  }

  WarmupPlan plan;
  plan.params = params;
  const std::size_t universe = n < 2 ? 0 : n * (n - 1);
  plan.pair_count = std::min(pretraining_pair_count(n, params.k, params.alpha, model.residual_variance),
                             universe);

  plan.selection_probs.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    plan.selection_probs[i] = 1.0 / (model.residuals(static_cast<Eigen::Index>(i)) + params.epsilon);
    total += plan.selection_probs[i];
  }
  for (double& prob : plan.selection_probs) prob /= total;
  return plan;
}

ResidualWeightedSampler::ResidualWeightedSampler(std::vector<double> probabilities)
    : probs_(std::move(probabilities)) {
  if (probs_.size() < 2) throw InputError("need at least two rows to sample pairs");
  cumulative_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
}

std::size_t ResidualWeightedSampler::locate(double mass) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), mass);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::size_t ResidualWeightedSampler::draw(Rng& rng) const { return locate(rng.uniform() * cumulative_.back()); }

std::size_t ResidualWeightedSampler::draw_excluding(Rng& rng, std::size_t excluded) const {
  const double before = excluded == 0 ? 0.0 : cumulative_[excluded - 1];
  const double remaining = cumulative_.back() - probs_[excluded];
  double mass = rng.uniform() * remaining;
  // Skip over the excluded row's slice of the cumulative distribution.
  if (mass >= before) mass += probs_[excluded];
  std::size_t index = locate(mass);
  if (index == excluded) {
    // Rounding at the slice boundary; step to the nearest row with mass.
    index = excluded + 1 < probs_.size() ? excluded + 1 : excluded - 1;
  }
  return index;
}

std::vector<PseudoLabeledPair> sample_pseudo_pairs(const WarmupPlan& plan, const PcaModel& model,
                                                   std::uint64_t seed) {
  std::vector<PseudoLabeledPair> pairs;
  if (plan.pair_count == 0) return pairs;
  if (plan.selection_probs.size() != static_cast<std::size_t>(model.scores.size())) {
    throw InputError("warm-up plan and PCA model disagree on row count");
  }
  ResidualWeightedSampler sampler(plan.selection_probs);
  Rng rng(seed);
  pairs.reserve(plan.pair_count);
  for (std::size_t m = 0; m < plan.pair_count; ++m) {
    const std::size_t u = sampler.draw(rng);
    const std::size_t v = sampler.draw_excluding(rng, u);
    pairs.push_back({u, v,
                     pseudo_label(model.scores(static_cast<Eigen::Index>(u)),
                                  model.scores(static_cast<Eigen::Index>(v)))});
  }
  return pairs;
}

std::string describe_warmup(const PcaModel& model, const WarmupPlan& plan,
                            const std::vector<std::string>& feature_names, std::size_t top) {
  std::ostringstream out;
  out << "top eigenvalue: " << csv::format_double(model.eigenvalue) << "\n";
  out << "residual variance: " << csv::format_double(model.residual_variance) << "\n";
  out << "pre-training pairs: " << plan.pair_count << "\n";
  out << "power iterations: " << model.iterations << (model.used_fallback ? " (fallback used)" : "") << "\n";
  std::vector<Eigen::Index> order(static_cast<std::size_t>(model.direction.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(model.direction(a)) > std::abs(model.direction(b));
  });
  out << "top loadings:\n";
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    const auto j = order[i];
    const std::string name =
        static_cast<std::size_t>(j) < feature_names.size() ? feature_names[static_cast<std::size_t>(j)]
                                                            : "f" + std::to_string(j);
    out << "  " << name << " " << csv::format_fixed(model.direction(j), 6) << "\n";
  }
  return out.str();
}

}  // namespace coldpref
