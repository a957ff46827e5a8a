// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "coldpref/experiment.hpp"
#include "coldpref/oracle_sim.hpp"
#include "coldpref/pair_model.hpp"
#include "coldpref/pca_warmup.hpp"
#include "coldpref/rng.hpp"
#include "coldpref/run_config.hpp"
#include "coldpref/tabular_prep.hpp"
#include "support/oracles.hpp"

using namespace coldpref;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

struct PcaCase {
  oracles::Dense x;
};

std::vector<PcaCase> pca_cases() {
  std::mt19937_64 gen(20240101);
  std::uniform_int_distribution<int> pick_p(1, 20);
  std::vector<PcaCase> cases;
  for (int i = 0; i < 100; ++i) {
    const int p = pick_p(gen);
    std::uniform_int_distribution<int> pick_n(std::max(3, p + 1), 200);
    cases.push_back({oracles::random_centered(gen, pick_n(gen), p)});
  }
  return cases;
}

Outcome criterion_pca_oracle() {
  const auto start = Clock::now();
  double worst = 1.0;
  for (const auto& c : pca_cases()) {
    const auto model = fit_first_component(Matrix(c.x));
    const auto [values, vectors] = oracles::jacobi_eigen(c.x.transpose() * c.x / static_cast<double>(c.x.rows()));
    worst = std::min(worst, std::abs(model.direction.dot(vectors.col(0))));
  }
  const double elapsed = seconds_since(start);
  return {worst > 1.0 - 1e-8 && elapsed < 10.0,
          "min |w.w_oracle| = " + fmt(worst, 17) + ", " + fmt(elapsed, 3) + " s (limit 10 s)"};
}

Outcome criterion_pythagorean() {
  double worst = 0.0;
  for (const auto& c : pca_cases()) {
    const auto model = fit_first_component(Matrix(c.x));
    const double n = static_cast<double>(c.x.rows());
    const double trace = c.x.squaredNorm() / n;
    const double var_t = model.scores.squaredNorm() / n;
    worst = std::max(worst, std::abs(var_t + model.residual_variance - trace) / trace);
  }
  return {worst <= 1e-6, "max relative error " + fmt(worst, 3) + " (limit 1e-6)"};
}

Outcome criterion_pair_count() {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<std::size_t> pick_n(2, 100000);
  std::uniform_real_distribution<double> pick_k(1.0, 100.0);
  std::uniform_real_distribution<double> pick_alpha(1e-7, 1e-4);
  std::uniform_real_distribution<double> pick_s(0.0, 1e6);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = pick_n(gen);
    const double k = i % 10 == 0 ? std::round(pick_k(gen)) : pick_k(gen);
    const double alpha = pick_alpha(gen);
    const double s = i % 7 == 0 ? 0.0 : pick_s(gen);
    // Reference in extended precision; the floor must bracket the exact quotient.
    const long double exact = static_cast<long double>(n) * k / (1.0L + static_cast<long double>(alpha) * s);
    const auto expected = static_cast<std::size_t>(std::floor(exact));
    if (pretraining_pair_count(n, k, alpha, s) != expected) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 tuples"};
}

Outcome criterion_sampling_fidelity() {
  // Ten rows in three dimensions, spread around a dominant axis.
  Matrix x(10, 3);
  x << -4.0, -3.1, 0.2, -3.0, -2.2, -0.5, -2.0, -1.0, 0.9, -1.0, -0.9, -0.3, -0.5, 0.1, 0.4, 0.5, 0.2, -0.6,
      1.0, 1.3, 0.1, 2.0, 1.2, 0.8, 3.0, 2.5, -0.7, 6.0, 1.9, -0.3;
  const Eigen::RowVector3d mean = x.colwise().mean();
  x.rowwise() -= mean;
  const auto model = fit_first_component(x);
  const auto plan = plan_warmup(model, 10, WarmupParams{});
  ResidualWeightedSampler sampler(plan.selection_probs);
  Rng rng(derive_seed(1, "acceptance/chi2"));
  const int draws = 100000;
  std::vector<int> counts(10, 0);
  for (int i = 0; i < draws; ++i) ++counts[sampler.draw(rng)];
  double stat = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    const double expected = draws * plan.selection_probs[i];
    stat += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // Reference probabilities straight from the residuals.
  double norm = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i) norm += 1.0 / (model.residuals(i) + 1e-6);
  double prob_error = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    prob_error = std::max(prob_error, std::abs(plan.selection_probs[static_cast<std::size_t>(i)] -
                                               1.0 / (model.residuals(i) + 1e-6) / norm));
  }
  const double critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(9), 0.001));
  return {stat < critical && prob_error < 1e-12,
          "chi2 = " + fmt(stat, 4) + " < " + fmt(critical, 4) + " (df 9, alpha 0.001)"};
}

Outcome criterion_bradley_terry() {
  const auto start = Clock::now();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> pick(-3.0, 3.0);
  const TargetStats stats{-3.0, 3.0, 1.3};
  std::vector<OracleConfig> configs(4);
  configs[0].mode = OracleMode::exponential;
  configs[1].mode = OracleMode::exponential;
  configs[1].score_scale = 2.0;
  configs[2].mode = OracleMode::standard;
  configs[2].transform = PositivityTransform::min_max_shift;
  configs[3].mode = OracleMode::standard;
  configs[3].transform = PositivityTransform::exp;
  double worst_complement = 0.0;
  for (const auto& c : configs) {
    for (int i = 0; i < 20000; ++i) {
      const double a = pick(gen), b = pick(gen);
      worst_complement = std::max(
          worst_complement, std::abs(preference_prob(a, b, c, stats) + preference_prob(b, a, c, stats) - 1.0));
    }
  }
  bool within = true;
  std::string freqs;
  for (double pi : {0.1, 0.5, 0.75, 0.9}) {
    // Standard identity strengths pi and 1 - pi give probability exactly pi.
    Vector y(2);
    y << pi, 1.0 - pi;
    OracleConfig c;
    c.mode = OracleMode::standard;
    c.transform = PositivityTransform::identity;
    c.seed = derive_seed(2, "acceptance/bt", static_cast<std::uint64_t>(pi * 100));
    Oracle oracle(y, c);
    const int draws = 100000;
    int ones = 0;
    for (int i = 0; i < draws; ++i) ones += oracle.label(0, 1).label;
    const double freq = static_cast<double>(ones) / draws;
    within = within && std::abs(freq - pi) <= 3.0 * std::sqrt(pi * (1.0 - pi) / draws);
    freqs += (freqs.empty() ? "" : " ") + fmt(pi, 2) + "->" + fmt(freq, 5);
  }
  const double elapsed = seconds_since(start);
  return {worst_complement <= 1e-12 && within && elapsed < 5.0,
          "max |p+q-1| = " + fmt(worst_complement, 3) + ", freq " + freqs + ", " + fmt(elapsed, 3) + " s (limit 5 s)"};
}

PairBatch labelled_pairs(const PreparedDataset& d, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<int> labels;
  while (pairs.size() < m) {
    const auto u = rng.below(d.rows());
    const auto v = rng.below(d.rows());
    if (u == v) continue;
    pairs.emplace_back(u, v);
    labels.push_back(d.y(static_cast<Eigen::Index>(u)) > d.y(static_cast<Eigen::Index>(v)) ? 1 : 0);
  }
  return make_pair_batch(d.X, pairs, labels);
}

bool non_increasing(const TrainingTrace& trace, double& worst_rise) {
  bool ok = true;
  for (std::size_t i = 1; i < trace.loss.size(); ++i) {
    const double rise = trace.loss[i] - trace.loss[i - 1];
    worst_rise = std::max(worst_rise, rise);
    if (rise > 0.0) ok = false;
  }
  return ok;
}

Outcome criterion_boosting() {
  const auto data = generate_synthetic(SyntheticOptions{});
  LearnerConfig config;
  config.max_depth = tree_depth_for(data.features());
  TrainingTrace trace;
  auto model = PairEnsemble::fit_initial(labelled_pairs(data, 1000, 1), config, &trace);
  double worst_rise = -std::numeric_limits<double>::infinity();
  bool monotone = trace.loss.size() == 501 && non_increasing(trace, worst_rise);
  for (std::uint64_t s = 2; s < 12; ++s) {
    model.update(labelled_pairs(data, 50, s), &trace);
    monotone = monotone && non_increasing(trace, worst_rise);
  }

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  double worst_grad = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double prob = unit(gen);
    const double s = std::log(prob / (1.0 - prob));
    const std::vector<int> label{i % 2};
    const double h = 1e-5;
    Vector plus(1), minus(1);
    plus << s + h;
    minus << s - h;
    const double numeric = (logistic_loss(plus, label) - logistic_loss(minus, label)) / (2.0 * h);
    worst_grad = std::max(worst_grad, std::abs(numeric - (sigmoid(s) - label[0])));
  }

  int disagreements = 0;
  int trials = 0;
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const auto m = static_cast<Eigen::Index>(2 + rng.below(99));
    const auto f = static_cast<Eigen::Index>(1 + rng.below(5));
    PairBatch batch;
    batch.features.resize(m, f);
    batch.labels.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < f; ++j) batch.features(i, j) = rng.normal();
      batch.labels[static_cast<std::size_t>(i)] = rng.uniform() < sigmoid(2.0 * batch.features(i, 0)) ? 1 : 0;
    }
    LearnerConfig stump;
    stump.max_depth = 1;
    stump.rounds_warmup = 1;
    const auto fitted = PairEnsemble::fit_initial(batch, stump);
    if (fitted.trees().empty()) continue;
    ++trials;
    const double q = sigmoid(fitted.base_logit());
    std::vector<double> g, hs;
    for (int y : batch.labels) {
      g.push_back(q - y);
      hs.push_back(q * (1.0 - q));
    }
    const auto best = oracles::best_stump(oracles::Dense(batch.features), g, hs, stump.l2_lambda);
    const auto& nodes = fitted.trees()[0].nodes();
    bool agree;
    if (!best.split) {
      agree = nodes.size() == 1 && std::abs(nodes[0].weight - best.leaf_weight) < 1e-9;
    } else {
      agree = nodes.size() == 3 && nodes[0].feature == best.feature && nodes[0].threshold > best.lower &&
              nodes[0].threshold <= best.upper && std::abs(nodes[1].weight - best.left_weight) < 1e-9 &&
              std::abs(nodes[2].weight - best.right_weight) < 1e-9;
    }
    if (!agree) ++disagreements;
  }
  return {monotone && worst_grad <= 1e-6 && disagreements == 0,
          std::string("loss ") + (monotone ? "non-increasing" : "ROSE") + " (max step change " + fmt(worst_rise, 3) +
              "), gradient error " + fmt(worst_grad, 3) + ", stump oracle " + std::to_string(disagreements) + "/" +
              std::to_string(trials) + " disagreements"};
}

Outcome criterion_immutability() {
  SyntheticOptions o;
  o.n = 300;
  const auto data = generate_synthetic(o);
  LearnerConfig config;
  config.rounds_warmup = 100;
  auto model = PairEnsemble::fit_initial(labelled_pairs(data, 500, 1), config);
  std::vector<std::string> snapshot;
  for (const auto& t : model.trees()) snapshot.push_back(t.serialize());
  bool identical = true;
  for (std::uint64_t s = 2; s < 8; ++s) {
    model.update(labelled_pairs(data, 50, s));
    for (std::size_t i = 0; i < snapshot.size(); ++i) identical = identical && model.trees()[i].serialize() == snapshot[i];
    for (std::size_t i = snapshot.size(); i < model.trees().size(); ++i) snapshot.push_back(model.trees()[i].serialize());
  }
  PairEnsemble blank(config, 2 * data.features());
  const auto probe = labelled_pairs(data, 2000, 9);
  const Vector raw = blank.raw_scores(probe.features);
  bool half = true;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    half = half && sigmoid(raw(i)) == 0.5 &&
           blank.predict_prob(std::span<const double>(probe.features.row(i).data(), blank.feature_dim())) == 0.5;
  }
  return {identical && half, std::string("prior trees ") + (identical ? "byte-identical" : "CHANGED") +
                                 ", blank model " + (half ? "exactly 0.5" : "NOT 0.5")};
}

struct EndToEnd {
  ScenarioConfig scenario;
  PreparedDataset data;
  TestSet test;
  std::string csv;
  std::vector<AggregateRow> aggregate;
  double seconds = 0.0;
};

ScenarioConfig end_to_end_scenario() {
  ScenarioConfig s = ScenarioConfig::low_data();
  s.dataset_id = "synthetic";
  s.n_runs = 10;
  s.master_seed = 2024;
  s.oracle.mode = OracleMode::exponential;
  s.oracle.score_scale.reset();  // 1 / std(y)
  return s;
}

EndToEnd run_end_to_end(std::size_t jobs) {
  EndToEnd e;
  e.scenario = end_to_end_scenario();
  const auto start = Clock::now();
  SyntheticOptions o;
  o.n = 2000;
  o.p = 10;
  o.noise_std = 0.1;
  e.data = generate_synthetic(o);
  e.test = build_test_set(e.data, e.scenario.n_test, test_set_seed(e.scenario.master_seed));
  const auto curve = run_scenario(e.data, e.test, e.scenario, kAllPolicies, jobs);
  std::ostringstream out;
  write_results_csv(out, curve);
  e.csv = out.str();
  e.aggregate = aggregate_runs(curve);
  e.seconds = seconds_since(start);
  return e;
}

double mean_at(const std::vector<AggregateRow>& rows, PolicyKind policy, std::size_t queries) {
  for (const auto& r : rows)
    if (r.policy == policy && r.queries == queries) return r.f1_mean;
  return std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion_ordering(const EndToEnd& e) {
  bool ordered = true;
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t q = 50; q <= 400; q += 50) {
    const double cold = mean_at(e.aggregate, PolicyKind::coldstart_pretrained, q);
    const double warm = mean_at(e.aggregate, PolicyKind::warmstart_uncertainty, q);
    const double rand = mean_at(e.aggregate, PolicyKind::random_blank, q);
    const double margin = cold - std::max(warm, rand);
    min_margin = std::min(min_margin, margin);
    if (!(margin > 0.0)) ordered = false;
  }
  const double margin50 = mean_at(e.aggregate, PolicyKind::coldstart_pretrained, 50) -
                          std::max(mean_at(e.aggregate, PolicyKind::warmstart_uncertainty, 50),
                                   mean_at(e.aggregate, PolicyKind::random_blank, 50));
  return {ordered && margin50 > 0.0 && e.seconds < 600.0,
          "min margin over 50..400 = " + fmt(min_margin, 4) + ", margin at 50 = " + fmt(margin50, 4) + ", " +
              fmt(e.seconds, 4) + " s (limit 600 s)"};
}

Outcome criterion_limit(const EndToEnd& e) {
  const auto start = Clock::now();
  const LimitResult limit = practical_limit(e.data, e.test, e.scenario, LimitConfig{200, 100, 99});
  const double elapsed = seconds_since(start);
  double best = 0.0;
  for (auto p : kAllPolicies) best = std::max(best, mean_at(e.aggregate, p, 800));
  return {limit.f1 >= best && elapsed < 900.0 && limit.warnings.empty(),
          "limit F1 " + fmt(limit.f1, 4) + " from " + std::to_string(limit.labels_used) +
              " labels vs best mean F1 at 800 = " + fmt(best, 4) + ", " + fmt(elapsed, 4) + " s (limit 900 s)"};
}

Outcome criterion_determinism(const EndToEnd& first) {
  const std::size_t jobs = std::max(2U, std::thread::hardware_concurrency());
  const EndToEnd second = run_end_to_end(jobs);
  const bool same = second.csv == first.csv;
  return {same, std::string("results CSV ") + (same ? "byte-identical" : "DIFFERS") + " (" +
                    std::to_string(first.csv.size()) + " bytes, rerun with " + std::to_string(jobs) + " workers)"};
}

Outcome criterion_constants() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const auto low = ScenarioConfig::low_data();
  const auto ext = ScenarioConfig::extended();
  expect(kDefaultTestPairs == 20000 && low.n_test == 20000, "test set size 20000");
  expect(low.start == 50 && low.step == 50 && low.max_queries == 800 && low.grid().size() == 16, "grid 50:50:800");
  expect(low.n_runs == 40, "40 runs");
  expect(ext.max_queries == 10000 && ext.grid().size() == 200 && ext.n_runs == 1, "extended grid to 10000");
  expect(low.learner.rounds_warmup == 500, "500 warm-up rounds");
  expect(tree_depth_for(10) == 3 && tree_depth_for(9) == 3 && tree_depth_for(1) == 1 && tree_depth_for(20) == 4,
         "depth round(sqrt p)");
  expect(low.learner_for(10).max_depth == 3, "auto depth for 10 features");
  std::istringstream in("scenario = low_data\ndataset.synthetic = true\n");
  const auto parsed = parse_run_config(in, [](const std::string&) { return std::optional<std::string>(); });
  expect(parsed.scenario.n_test == 20000 && parsed.scenario.max_queries == 800 && parsed.scenario.n_runs == 40 &&
             parsed.scenario.learner.rounds_warmup == 500,
         "config preset");
  std::string detail = failures.empty() ? "all protocol constants match" : "mismatched:";
  for (const auto& f : failures) detail += " " + f + ";";
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int number, const std::string& name, const std::function<Outcome()>& check) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  criterion " << number << ": " << name << " -- "
              << outcome.detail << std::endl;
  };

  report(1, "PCA oracle equivalence", criterion_pca_oracle);
  report(2, "Pythagorean decomposition", criterion_pythagorean);
  report(3, "pre-training pair count formula", criterion_pair_count);
  report(4, "residual-weighted sampling fidelity", criterion_sampling_fidelity);
  report(5, "Bradley-Terry oracle", criterion_bradley_terry);
  report(6, "boosting correctness", criterion_boosting);
  report(7, "incremental immutability", criterion_immutability);

  std::optional<EndToEnd> e2e;
  try {
    e2e = run_end_to_end(1);
  } catch (const std::exception& e) {
    std::cout << "end-to-end run failed: " << e.what() << std::endl;
  }
  auto needs_e2e = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (!e2e) return {false, "end-to-end run unavailable"};
      return fn(*e2e);
    };
  };
  report(8, "cold start beats both baselines up to 400 queries", needs_e2e(criterion_ordering));
  report(9, "practical limit dominates every policy at 800 queries", needs_e2e(criterion_limit));
  report(10, "determinism of the end-to-end results", needs_e2e(criterion_determinism));
  report(11, "protocol fidelity constants", criterion_constants);

  std::cout << (failures == 0 ? "all 11 criteria passed" : std::to_string(failures) + " of 11 criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
