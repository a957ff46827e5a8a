#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coldpref/errors.hpp"
#include "coldpref/experiment.hpp"
#include "coldpref/tabular_prep.hpp"

namespace coldpref {

// Everything `run` and `bench-limit` need, read from flat `key = value` text.
struct RunConfig {
  ScenarioConfig scenario = ScenarioConfig::low_data();
  std::optional<std::string> dataset_path;  // prepared CSV
  bool synthetic = false;
  SyntheticOptions synth;
  std::vector<PolicyKind> policies{kAllPolicies.begin(), kAllPolicies.end()};
  LimitConfig limit;
  std::string results_path = "results.csv";
  std::optional<std::string> aggregate_path;
  std::string limit_path = "limit.csv";
  std::optional<std::string> diagnostics_path;
};

// Carries every validation problem found, one per line in what().
class ConfigError : public InputError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
EnvLookup process_environment();

// COLDPREF_ + key upper-cased with '.' replaced by '_' (warmup.k -> COLDPREF_WARMUP_K).
std::string env_name_for(const std::string& key);

// Every key the parser understands, in documentation order.
const std::vector<std::string>& known_config_keys();

// Parses and validates; environment overrides win over file values.
// Throws ConfigError listing all problems.
RunConfig parse_run_config(std::istream& in, const EnvLookup& env);

}  // namespace coldpref
