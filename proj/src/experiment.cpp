#include "coldpref/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

#include "coldpref/csv.hpp"
#include "coldpref/errors.hpp"

namespace coldpref {

namespace {

std::vector<int> predictions_from_raw(const Vector& raw) {
  std::vector<int> out(static_cast<std::size_t>(raw.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(raw(static_cast<Eigen::Index>(i))) > 0.5 ? 1 : 0;
  return out;
}

// Ordering by a scalar score, used for the PCA orientation diagnostic.
double f1_of_scores(const Vector& scores, const TestSet& test, double sign) {
  std::vector<int> predictions;
  predictions.reserve(test.size());
  for (const auto& pair : test.pairs) {
    predictions.push_back(sign * scores(static_cast<Eigen::Index>(pair.u)) >
                                  sign * scores(static_cast<Eigen::Index>(pair.v))
                              ? 1
                              : 0);
  }
  return f1_score(predictions, test.labels());
}

PairBatch label_with_oracle(const Matrix& X, const std::vector<IndexPair>& pairs, Oracle& oracle) {
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (const auto& [u, v] : pairs) labels.push_back(oracle.label(u, v).label);
  return make_pair_batch(X, pairs, labels);
}

// Raw test-set scores kept in step with an ensemble that only ever grows.
class TestScores {
 public:
  TestScores(const PairEnsemble& model, const TestSet& test)
      : test_(test), raw_(Vector::Constant(static_cast<Eigen::Index>(test.size()), model.base_logit())) {
    refresh(model);
  }

  void refresh(const PairEnsemble& model) {
    model.add_tree_scores(test_.features, seen_, raw_);
    seen_ = model.trees().size();
  }

  double f1() const { return f1_from_raw(raw_, test_); }

 private:
  const TestSet& test_;
  Vector raw_;
  std::size_t seen_ = 0;
};

OracleConfig oracle_for_run(const ScenarioConfig& scenario, std::uint64_t seed) {
  OracleConfig config = scenario.oracle;
  config.seed = seed;
  return config;
}

}  // namespace

std::string to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::random_blank:
      return "random_blank";
    case PolicyKind::warmstart_uncertainty:
      return "warmstart_uncertainty";
    case PolicyKind::coldstart_pretrained:
      return "coldstart_pretrained";
  }
  return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
  for (auto policy : kAllPolicies) {
    if (to_string(policy) == name) return policy;
  }
  throw InputError("unknown policy '" + name +
                   "' (valid: random_blank, warmstart_uncertainty, coldstart_pretrained)");
}

std::vector<int> TestSet::labels() const {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) out.push_back(pair.label);
  return out;
}

TestSet build_test_set(const PreparedDataset& data, std::size_t n_test, std::uint64_t seed,
                       std::vector<std::string>* warnings) {
  PairPool pool(data.rows());
  if (n_test > pool.universe()) {
    if (warnings != nullptr) {
      warnings->push_back("test set size " + std::to_string(n_test) + " clamped to " +
                          std::to_string(pool.universe()) + " available pairs");
    }
    n_test = pool.universe();
  }
  Rng rng(seed);
  const QueryBatch drawn = sample_random(pool, n_test, rng);
  TestSet test;
  test.pairs.reserve(n_test);
  for (const auto& [u, v] : drawn.pairs) {
    const int label = data.y(static_cast<Eigen::Index>(u)) > data.y(static_cast<Eigen::Index>(v)) ? 1 : 0;
    test.pairs.push_back({u, v, label});
  }
  test.features = make_pair_features(data.X, drawn.pairs);
  return test;
}

double f1_score(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.size() != truths.size()) throw InputError("prediction and truth lengths differ");
  if (predictions.empty()) throw InputError("F1 of an empty set is undefined");
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool predicted = predictions[i] == 1;
    const bool actual = truths[i] == 1;
    tp += predicted && actual ? 1 : 0;
    fp += predicted && !actual ? 1 : 0;
    fn += !predicted && actual ? 1 : 0;
  }
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double f1_from_raw(const Vector& raw, const TestSet& test) {
  return f1_score(predictions_from_raw(raw), test.labels());
}

ScenarioConfig ScenarioConfig::low_data() {
  ScenarioConfig config;
  config.start = 50;
  config.step = 50;
  config.max_queries = 800;
  config.n_runs = 40;
  return config;
}

ScenarioConfig ScenarioConfig::extended() {
  ScenarioConfig config;
  config.start = 50;
  config.step = 50;
  config.max_queries = 10000;
  config.n_runs = 1;
  return config;
}

void ScenarioConfig::validate() const {
  if (start == 0 || step == 0) throw InputError("start and step must be positive");
  if (max_queries < start) throw InputError("max_queries must be at least start");
  if (max_queries % step != 0) throw InputError("max_queries must be a multiple of step");
  if ((max_queries - start) % step != 0) throw InputError("max_queries - start must be a multiple of step");
  if (n_runs == 0) throw InputError("n_runs must be positive");
  if (n_test == 0) throw InputError("test set size must be positive");
  if (candidate_pool_factor == 0) throw InputError("candidate_pool_factor must be positive");
  oracle.validate();
}

std::vector<std::size_t> ScenarioConfig::grid() const {
  std::vector<std::size_t> points;
  for (std::size_t q = start; q <= max_queries; q += step) points.push_back(q);
  return points;
}

LearnerConfig ScenarioConfig::learner_for(std::size_t p_features) const {
  LearnerConfig config = learner;
  if (auto_depth) config.max_depth = tree_depth_for(p_features);
  return config;
}

std::uint64_t test_set_seed(std::uint64_t master_seed) { return derive_seed(master_seed, "test-set"); }

RunSeeds derive_run_seeds(std::uint64_t master_seed, PolicyKind policy, std::size_t run_index, bool reuse_warmup) {
  RunSeeds seeds;
  seeds.run = derive_seed(master_seed, "run", run_index);
  seeds.oracle = derive_seed(seeds.run, "oracle");
  seeds.sampler = derive_seed(seeds.run, "sampler/" + to_string(policy));
  seeds.warmup = reuse_warmup ? derive_seed(master_seed, "warmup") : derive_seed(seeds.run, "warmup");
  return seeds;
}

LearningCurve run_policy(PolicyKind policy, const PreparedDataset& data, const TestSet& test,
                         const ScenarioConfig& scenario, std::size_t run_index, RunStats* stats) {
  scenario.validate();
  const RunSeeds seeds = derive_run_seeds(scenario.master_seed, policy, run_index, scenario.reuse_warmup);
  const LearnerConfig learner = scenario.learner_for(data.features());
  const std::size_t feature_dim = 2 * data.features();

  RunStats local;
  PairEnsemble model(learner, feature_dim);
  if (policy == PolicyKind::coldstart_pretrained) {
    const PcaModel pca = fit_first_component(data.X);
    const WarmupPlan plan = plan_warmup(pca, data.rows(), scenario.warmup);
    const auto pseudo = sample_pseudo_pairs(plan, pca, seeds.warmup);
    local.warmup.ran = true;
    local.warmup.pseudo_pairs = pseudo.size();
    local.warmup.residual_variance = pca.residual_variance;
    local.warmup.pca_f1 = f1_of_scores(pca.scores, test, 1.0);
    local.warmup.pca_f1_reversed = f1_of_scores(pca.scores, test, -1.0);
    if (!pseudo.empty()) {
      std::vector<IndexPair> pairs;
      std::vector<int> labels;
      pairs.reserve(pseudo.size());
      labels.reserve(pseudo.size());
      for (const auto& pair : pseudo) {
        pairs.emplace_back(pair.u, pair.v);
        labels.push_back(pair.label);
      }
      model = PairEnsemble::fit_initial(make_pair_batch(data.X, pairs, labels), learner);
    }
  }

  TestScores scores(model, test);
  if (local.warmup.ran) local.warmup.pretrained_f1 = scores.f1();

  PairPool pool(data.rows(), scenario.candidate_pool_factor);
  if (scenario.strict_disjoint_test) {
    std::vector<IndexPair> test_pairs;
    for (const auto& pair : test.pairs) test_pairs.emplace_back(pair.u, pair.v);
    pool.mark_queried(test_pairs);
  }
  Oracle oracle(data.y, oracle_for_run(scenario, seeds.oracle));
  Rng sampler_rng(seeds.sampler);

  LearningCurve curve;
  std::size_t queries = 0;
  for (const std::size_t target : scenario.grid()) {
    const std::size_t batch_size = target - queries;
    const QueryBatch batch = policy == PolicyKind::random_blank
                                 ? sample_random(pool, batch_size, sampler_rng)
                                 : sample_uncertain(pool, batch_size, model, data.X, sampler_rng);
    pool.mark_queried(batch.pairs);
    model.update(label_with_oracle(data.X, batch.pairs, oracle));
    queries = target;
    scores.refresh(model);
    curve.push_back({scenario.dataset_id, policy, run_index, seeds.run, queries, scores.f1()});
  }
  local.oracle_queries = oracle.queries();
  if (stats != nullptr) *stats = local;
  return curve;
}

void sort_canonical(LearningCurve& curve) {
  std::stable_sort(curve.begin(), curve.end(), [](const CurveRow& a, const CurveRow& b) {
    return std::make_tuple(a.dataset, to_string(a.policy), a.run, a.queries) <
           std::make_tuple(b.dataset, to_string(b.policy), b.run, b.queries);
  });
}

LearningCurve run_scenario(const PreparedDataset& data, const TestSet& test, const ScenarioConfig& scenario,
                           std::span<const PolicyKind> policies, std::size_t jobs,
                           std::vector<RunRecord>* records) {
  scenario.validate();
  struct Job {
    PolicyKind policy;
    std::size_t run;
  };
  std::vector<Job> work;
  for (std::size_t run = 0; run < scenario.n_runs; ++run) {
    for (auto policy : policies) work.push_back({policy, run});
  }
  std::vector<LearningCurve> results(work.size());
  std::vector<RunStats> stats(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        results[i] = run_policy(work[i].policy, data, test, scenario, work[i].run, &stats[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(work.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  if (records != nullptr) {
    records->clear();
    for (std::size_t i = 0; i < work.size(); ++i) records->push_back({work[i].policy, work[i].run, stats[i]});
  }
  LearningCurve curve;
  for (auto& part : results) curve.insert(curve.end(), part.begin(), part.end());
  sort_canonical(curve);
  return curve;
}

LimitResult practical_limit(const PreparedDataset& data, const TestSet& test, const ScenarioConfig& scenario,
                            const LimitConfig& limit) {
  if (limit.initial_batch == 0 || limit.batch == 0) throw InputError("limit batch sizes must be positive");
  LimitResult result;
  result.initial_batch = limit.initial_batch;
  result.batch = limit.batch;

  PairPool pool(data.rows(), scenario.candidate_pool_factor);
  if (scenario.strict_disjoint_test) {
    std::vector<IndexPair> test_pairs;
    for (const auto& pair : test.pairs) test_pairs.emplace_back(pair.u, pair.v);
    pool.mark_queried(test_pairs);
  }
  const std::size_t budget = limit.initial_batch + limit.iterations * limit.batch;
  if (budget > pool.remaining()) {
    const double scale = static_cast<double>(pool.remaining()) / static_cast<double>(budget);
    result.initial_batch = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(limit.initial_batch * scale)));
    result.batch = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(limit.batch * scale)));
    result.warnings.push_back("only " + std::to_string(pool.remaining()) + " pairs available for a budget of " +
                              std::to_string(budget) + "; batches scaled to " +
                              std::to_string(result.initial_batch) + " + " + std::to_string(limit.iterations) +
                              " x " + std::to_string(result.batch));
  }

  const LearnerConfig learner = scenario.learner_for(data.features());
  Oracle oracle(data.y, oracle_for_run(scenario, derive_seed(scenario.master_seed, "limit/oracle")));
  Rng rng(derive_seed(scenario.master_seed, "limit/sampler"));

  QueryBatch batch = sample_random(pool, result.initial_batch, rng);
  pool.mark_queried(batch.pairs);
  PairEnsemble model = PairEnsemble::fit_initial(label_with_oracle(data.X, batch.pairs, oracle), learner);
  for (std::size_t it = 0; it < limit.iterations; ++it) {
    batch = sample_uncertain(pool, result.batch, model, data.X, rng);
    pool.mark_queried(batch.pairs);
    model.update(label_with_oracle(data.X, batch.pairs, oracle));
  }
  result.labels_used = oracle.queries();
  result.f1 = f1_from_raw(model.raw_scores(test.features), test);
  return result;
}

std::vector<AggregateRow> aggregate_runs(const LearningCurve& curve) {
  using GroupKey = std::pair<std::string, std::string>;  // dataset, policy name
  std::map<GroupKey, std::map<std::size_t, std::map<std::size_t, double>>> groups;  // run -> queries -> f1
  std::map<GroupKey, PolicyKind> policy_of;
  for (const auto& row : curve) {
    const GroupKey key{row.dataset, to_string(row.policy)};
    policy_of[key] = row.policy;
    auto& points = groups[key][row.run];
    if (!points.emplace(row.queries, row.f1).second) {
      throw InputError("duplicate curve point for " + key.second + " run " + std::to_string(row.run));
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, runs] : groups) {
    const auto& reference = runs.begin()->second;
    for (const auto& [run, points] : runs) {
      bool same = points.size() == reference.size();
      for (auto a = points.begin(), b = reference.begin(); same && a != points.end(); ++a, ++b) {
        same = a->first == b->first;
      }
      if (!same) throw InputError("inconsistent query grids across runs of " + key.second);
    }
    for (const auto& [queries, ignored] : reference) {
      (void)ignored;
      double sum = 0.0;
      for (const auto& [run, points] : runs) sum += points.at(queries);
      const double count = static_cast<double>(runs.size());
      const double mean = sum / count;
      double sq = 0.0;
      for (const auto& [run, points] : runs) sq += (points.at(queries) - mean) * (points.at(queries) - mean);
      const double sd = runs.size() > 1 ? std::sqrt(sq / (count - 1.0)) : 0.0;
      out.push_back({key.first, policy_of.at(key), queries, mean, sd, runs.size()});
    }
  }
  return out;
}

void write_results_csv(std::ostream& out, const LearningCurve& curve) {
  out << kResultsHeader << '\n';
  for (const auto& row : curve) {
    out << row.dataset << ',' << to_string(row.policy) << ',' << row.run << ',' << row.seed << ',' << row.queries
        << ',' << csv::format_double(row.f1) << '\n';
  }
}

LearningCurve read_results_csv(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) throw InputError("results CSV is empty");
  if (csv::trim(line) != kResultsHeader) {
    throw InputError(std::string("results CSV header must be '") + kResultsHeader + "'");
  }
  LearningCurve curve;
  std::size_t line_number = 1;
  while (csv::next_line(in, line)) {
    ++line_number;
    const auto fields = csv::split_line(line);
    const std::string where = "results CSV line " + std::to_string(line_number);
    if (fields.size() != 6) throw InputError(where + ": expected 6 fields");
    CurveRow row;
    row.dataset = fields[0];
    row.policy = parse_policy(std::string(csv::trim(fields[1])));
    const auto run = csv::parse_double(fields[2]);
    const auto queries = csv::parse_double(fields[4]);
    const auto f1 = csv::parse_double(fields[5]);
    if (!run || !queries || !f1 || *run < 0 || *queries < 0) throw InputError(where + ": malformed number");
    if (!(*f1 >= 0.0 && *f1 <= 1.0)) throw InputError(where + ": f1 outside [0, 1]");
    row.run = static_cast<std::size_t>(*run);
    row.seed = std::stoull(std::string(csv::trim(fields[3])));
    row.queries = static_cast<std::size_t>(*queries);
    row.f1 = *f1;
    curve.push_back(std::move(row));
  }
  if (curve.empty()) throw InputError("results CSV has no rows");
  return curve;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const auto& row : rows) {
    out << row.dataset << ',' << to_string(row.policy) << ',' << row.queries << ',' << csv::format_double(row.f1_mean)
        << ',' << csv::format_double(row.f1_std) << ',' << row.n_runs << '\n';
  }
}

}  // namespace coldpref
