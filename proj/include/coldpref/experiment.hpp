#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "coldpref/oracle_sim.hpp"
#include "coldpref/pair_model.hpp"
#include "coldpref/pca_warmup.hpp"
#include "coldpref/sampler.hpp"
#include "coldpref/tabular_prep.hpp"

namespace coldpref {

enum class PolicyKind { random_blank, warmstart_uncertainty, coldstart_pretrained };

inline constexpr std::array<PolicyKind, 3> kAllPolicies{PolicyKind::random_blank, PolicyKind::warmstart_uncertainty,
                                                        PolicyKind::coldstart_pretrained};

std::string to_string(PolicyKind policy);
// Throws InputError listing the valid names.
PolicyKind parse_policy(const std::string& name);

inline constexpr std::size_t kDefaultTestPairs = 20000;

struct TestPair {
  std::size_t u = 0;
  std::size_t v = 0;
  int label = 0;  // 1 iff y_u > y_v
};

struct TestSet {
  std::vector<TestPair> pairs;
  Matrix features;  // pair features, one row per test pair

  std::size_t size() const { return pairs.size(); }
  std::vector<int> labels() const;
};

// Unique unordered pairs sampled uniformly with random orientation, labelled
// without noise. n_test beyond n(n-1)/2 is clamped with a warning.
TestSet build_test_set(const PreparedDataset& data, std::size_t n_test, std::uint64_t seed,
                       std::vector<std::string>* warnings = nullptr);

// Positive-class F1; 0 when precision + recall is 0.
double f1_score(std::span<const int> predictions, std::span<const int> truths);

// F1 of thresholding raw model scores at probability 0.5 against the test labels.
double f1_from_raw(const Vector& raw, const TestSet& test);

struct ScenarioConfig {
  std::string dataset_id = "dataset";
  std::size_t start = 50;
  std::size_t step = 50;
  std::size_t max_queries = 800;
  std::size_t n_runs = 40;
  std::size_t n_test = kDefaultTestPairs;
  WarmupParams warmup;
  bool reuse_warmup = false;  // same pseudo-pair sample for every run
  OracleConfig oracle;        // seed is replaced per run
  LearnerConfig learner;
  bool auto_depth = true;     // depth from the dataset's column count
  std::size_t candidate_pool_factor = 20;
  bool strict_disjoint_test = false;  // never query a test pair
  std::uint64_t master_seed = 0;

  // 50:50:800, 40 runs.
  static ScenarioConfig low_data();
  // 50:50:10000, single run.
  static ScenarioConfig extended();

  void validate() const;
  std::vector<std::size_t> grid() const;
  LearnerConfig learner_for(std::size_t p_features) const;
};

struct CurveRow {
  std::string dataset;
  PolicyKind policy = PolicyKind::random_blank;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t queries = 0;
  double f1 = 0.0;
};

using LearningCurve = std::vector<CurveRow>;

struct RunSeeds {
  std::uint64_t run = 0;      // reported in the results CSV
  std::uint64_t oracle = 0;   // shared by every policy of a run
  std::uint64_t sampler = 0;  // policy specific
  std::uint64_t warmup = 0;
};

RunSeeds derive_run_seeds(std::uint64_t master_seed, PolicyKind policy, std::size_t run_index, bool reuse_warmup);

std::uint64_t test_set_seed(std::uint64_t master_seed);

struct WarmupDiagnostics {
  bool ran = false;
  std::size_t pseudo_pairs = 0;
  double residual_variance = 0.0;
  double pca_f1 = 0.0;           // ordering by PCA scores
  double pca_f1_reversed = 0.0;  // ordering by negated PCA scores
  double pretrained_f1 = 0.0;    // warmed-up model before any oracle query
};

struct RunStats {
  std::size_t oracle_queries = 0;
  WarmupDiagnostics warmup;
};

LearningCurve run_policy(PolicyKind policy, const PreparedDataset& data, const TestSet& test,
                         const ScenarioConfig& scenario, std::size_t run_index, RunStats* stats = nullptr);

struct RunRecord {
  PolicyKind policy = PolicyKind::random_blank;
  std::size_t run = 0;
  RunStats stats;
};

// Every (policy, run) job, optionally on `jobs` threads; rows in canonical order.
// `records`, when given, receives one entry per job ordered by run then policy.
LearningCurve run_scenario(const PreparedDataset& data, const TestSet& test, const ScenarioConfig& scenario,
                           std::span<const PolicyKind> policies, std::size_t jobs = 1,
                           std::vector<RunRecord>* records = nullptr);

// Sort by dataset, policy name, run, queries.
void sort_canonical(LearningCurve& curve);

struct LimitConfig {
  std::size_t initial_batch = 1000;
  std::size_t batch = 1000;
  std::size_t iterations = 99;
};

struct LimitResult {
  double f1 = 0.0;
  std::size_t labels_used = 0;
  std::size_t initial_batch = 0;
  std::size_t batch = 0;
  std::vector<std::string> warnings;
};

// Random initial batch, then `iterations` uncertainty-selected batches, all
// oracle labelled; returns the final test F1.
LimitResult practical_limit(const PreparedDataset& data, const TestSet& test, const ScenarioConfig& scenario,
                            const LimitConfig& limit = {});

struct AggregateRow {
  std::string dataset;
  PolicyKind policy = PolicyKind::random_blank;
  std::size_t queries = 0;
  double f1_mean = 0.0;
  double f1_std = 0.0;  // sample standard deviation, 0 for a single run
  std::size_t n_runs = 0;
};

// Throws InputError when runs of a policy do not share the same query grid.
std::vector<AggregateRow> aggregate_runs(const LearningCurve& curve);

inline constexpr const char* kResultsHeader = "dataset,policy,run,seed,queries,f1";
inline constexpr const char* kAggregateHeader = "dataset,policy,queries,f1_mean,f1_std,n_runs";

void write_results_csv(std::ostream& out, const LearningCurve& curve);
LearningCurve read_results_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace coldpref
