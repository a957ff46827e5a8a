#include "coldpref/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>

#include "coldpref/csv.hpp"

namespace coldpref {

namespace {

std::string join_lines(const std::vector<std::string>& problems) {
  std::string text = "invalid configuration:";
  for (const auto& p : problems) text += "\n  " + p;
  return text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    const auto item = csv::trim(std::string_view(text).substr(start, end - start));
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

// Collects problems instead of throwing so that one pass reports all of them.
class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& values) : values_(values) {}

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string* raw(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  void size(const std::string& key, std::size_t& target) {
    if (const auto* text = raw(key)) {
      std::uint64_t value = 0;
      if (!parse_unsigned(*text, value)) {
        problem(key, "expected a nonnegative integer, got '" + *text + "'");
      } else {
        target = static_cast<std::size_t>(value);
      }
    }
  }

  void integer(const std::string& key, int& target) {
    std::size_t value = static_cast<std::size_t>(std::max(target, 0));
    const std::size_t before = problems_.size();
    size(key, value);
    if (problems_.size() == before) target = static_cast<int>(value);
  }

  void u64(const std::string& key, std::uint64_t& target) {
    if (const auto* text = raw(key)) {
      std::uint64_t value = 0;
      if (!parse_unsigned(*text, value)) {
        problem(key, "expected a nonnegative integer, got '" + *text + "'");
      } else {
        target = value;
      }
    }
  }

  void real(const std::string& key, double& target) {
    if (const auto* text = raw(key)) {
      auto value = csv::parse_double(*text);
      if (!value || !std::isfinite(*value)) {
        problem(key, "expected a number, got '" + *text + "'");
      } else {
        target = *value;
      }
    }
  }

  void flag(const std::string& key, bool& target) {
    if (const auto* text = raw(key)) {
      if (*text == "true" || *text == "1" || *text == "yes") {
        target = true;
      } else if (*text == "false" || *text == "0" || *text == "no") {
        target = false;
      } else {
        problem(key, "expected true or false, got '" + *text + "'");
      }
    }
  }

  void problem(const std::string& key, const std::string& message) { problems_.push_back(key + ": " + message); }
  void problem(const std::string& message) { problems_.push_back(message); }
  std::vector<std::string>& problems() { return problems_; }

 private:
  static bool parse_unsigned(const std::string& text, std::uint64_t& value) {
    const auto view = csv::trim(text);
    const auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
    return ec == std::errc() && ptr == view.data() + view.size() && !view.empty();
  }

  const std::map<std::string, std::string>& values_;
  std::vector<std::string> problems_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InputError(join_lines(problems)), problems_(std::move(problems)) {}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
  };
}

std::string env_name_for(const std::string& key) {
  std::string name = "COLDPREF_";
  for (char c : key) name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys{
      "scenario",          "seed",
      "dataset.id",        "dataset.path",
      "dataset.synthetic", "synth.n",
      "synth.p",           "synth.noise_std",
      "synth.seed",        "synth.factor_loading",
      "grid.start",        "grid.step",
      "grid.max_queries",  "runs",
      "test.size",         "test.strict_disjoint",
      "warmup.k",          "warmup.alpha",
      "warmup.epsilon",    "warmup.reuse",
      "oracle.mode",       "oracle.transform",
      "oracle.delta",      "oracle.scale",
      "learner.rounds_warmup", "learner.rounds_increment",
      "learner.learning_rate", "learner.l2_lambda",
      "learner.max_depth", "learner.min_child",
      "sampler.candidate_factor", "policies",
      "limit.initial_batch", "limit.batch",
      "limit.iterations",  "output.results",
      "output.aggregate",  "output.limit",
      "output.diagnostics"};
  return keys;
}

RunConfig parse_run_config(std::istream& in, const EnvLookup& env) {
  const auto& keys = known_config_keys();
  std::map<std::string, std::string> values;
  std::vector<std::string> problems;

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = csv::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_number) + ": expected 'key = value'");
      continue;
    }
    const std::string key(csv::trim(text.substr(0, eq)));
    const std::string value(csv::trim(text.substr(eq + 1)));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      problems.push_back("line " + std::to_string(line_number) + ": unknown key '" + key + "'");
      continue;
    }
    if (!values.emplace(key, value).second) {
      problems.push_back("line " + std::to_string(line_number) + ": duplicate key '" + key + "'");
    }
  }
  for (const auto& key : keys) {
    if (auto value = env(env_name_for(key))) values[key] = std::string(csv::trim(*value));
  }

  RunConfig config;
  Reader read(values);
  read.problems() = std::move(problems);

  if (const auto* preset = read.raw("scenario")) {
    if (*preset == "low_data") {
      config.scenario = ScenarioConfig::low_data();
    } else if (*preset == "extended") {
      config.scenario = ScenarioConfig::extended();
    } else {
      read.problem("scenario", "expected low_data or extended, got '" + *preset + "'");
    }
  }
  auto& sc = config.scenario;

  read.u64("seed", sc.master_seed);
  if (const auto* id = read.raw("dataset.id")) sc.dataset_id = *id;
  if (const auto* path = read.raw("dataset.path")) config.dataset_path = *path;
  read.flag("dataset.synthetic", config.synthetic);
  read.size("synth.n", config.synth.n);
  read.size("synth.p", config.synth.p);
  read.real("synth.noise_std", config.synth.noise_std);
  read.u64("synth.seed", config.synth.seed);
  read.real("synth.factor_loading", config.synth.factor_loading);

  read.size("grid.start", sc.start);
  read.size("grid.step", sc.step);
  read.size("grid.max_queries", sc.max_queries);
  read.size("runs", sc.n_runs);
  read.size("test.size", sc.n_test);
  read.flag("test.strict_disjoint", sc.strict_disjoint_test);

  read.real("warmup.k", sc.warmup.k);
  read.real("warmup.alpha", sc.warmup.alpha);
  read.real("warmup.epsilon", sc.warmup.epsilon);
  read.flag("warmup.reuse", sc.reuse_warmup);

  if (const auto* mode = read.raw("oracle.mode")) {
    try {
      sc.oracle.mode = parse_oracle_mode(*mode);
    } catch (const InputError& e) {
      read.problem("oracle.mode", e.what());
    }
  }
  if (const auto* transform = read.raw("oracle.transform")) {
    try {
      sc.oracle.transform = parse_transform(*transform);
    } catch (const InputError& e) {
      read.problem("oracle.transform", e.what());
    }
  }
  read.real("oracle.delta", sc.oracle.delta);
  if (const auto* scale = read.raw("oracle.scale")) {
    if (*scale == "auto") {
      sc.oracle.score_scale.reset();
    } else {
      double value = 0.0;
      read.real("oracle.scale", value);
      sc.oracle.score_scale = value;
    }
  }

  read.integer("learner.rounds_warmup", sc.learner.rounds_warmup);
  read.integer("learner.rounds_increment", sc.learner.rounds_increment);
  read.real("learner.learning_rate", sc.learner.learning_rate);
  read.real("learner.l2_lambda", sc.learner.l2_lambda);
  if (const auto* depth = read.raw("learner.max_depth")) {
    if (*depth == "auto") {
      sc.auto_depth = true;
    } else {
      sc.auto_depth = false;
      read.integer("learner.max_depth", sc.learner.max_depth);
    }
  }
  read.size("learner.min_child", sc.learner.min_child);
  read.size("sampler.candidate_factor", sc.candidate_pool_factor);

  if (const auto* list = read.raw("policies")) {
    config.policies.clear();
    for (const auto& name : split_list(*list)) {
      try {
        config.policies.push_back(parse_policy(name));
      } catch (const InputError& e) {
        read.problem("policies", e.what());
      }
    }
    if (config.policies.empty() && read.problems().empty()) read.problem("policies", "no policies listed");
  }

  read.size("limit.initial_batch", config.limit.initial_batch);
  read.size("limit.batch", config.limit.batch);
  read.size("limit.iterations", config.limit.iterations);

  if (const auto* path = read.raw("output.results")) config.results_path = *path;
  if (const auto* path = read.raw("output.aggregate")) config.aggregate_path = *path;
  if (const auto* path = read.raw("output.limit")) config.limit_path = *path;
  if (const auto* path = read.raw("output.diagnostics")) config.diagnostics_path = *path;

  // Range checks.
  if (config.dataset_path && config.synthetic) {
    read.problem("dataset.path and dataset.synthetic = true are mutually exclusive");
  }
  if (!config.dataset_path && !config.synthetic) {
    read.problem("a dataset is required: set dataset.path or dataset.synthetic = true");
  }
  if (!(sc.warmup.k >= 1.0 && sc.warmup.k <= 100.0)) read.problem("warmup.k", "must lie in [1, 100]");
  if (!(sc.warmup.alpha >= 1e-7 && sc.warmup.alpha <= 1e-4)) read.problem("warmup.alpha", "must lie in [1e-7, 1e-4]");
  if (!(sc.warmup.epsilon > 0.0)) read.problem("warmup.epsilon", "must be positive");
  if (sc.start == 0) read.problem("grid.start", "must be positive");
  if (sc.step == 0) {
    read.problem("grid.step", "must be positive");
  } else {
    if (sc.max_queries % sc.step != 0) read.problem("grid.max_queries", "must be a multiple of grid.step");
    if (sc.max_queries < sc.start || (sc.max_queries - sc.start) % sc.step != 0) {
      read.problem("grid.max_queries", "must equal grid.start plus a whole number of steps");
    }
  }
  if (sc.n_runs == 0) read.problem("runs", "must be positive");
  if (sc.n_test == 0) read.problem("test.size", "must be positive");
  if (!(sc.oracle.delta > 0.0)) read.problem("oracle.delta", "must be positive");
  if (sc.oracle.score_scale && !(*sc.oracle.score_scale > 0.0)) read.problem("oracle.scale", "must be positive or auto");
  if (!(sc.learner.learning_rate > 0.0)) read.problem("learner.learning_rate", "must be positive");
  if (!(sc.learner.l2_lambda >= 0.0)) read.problem("learner.l2_lambda", "must be nonnegative");
  if (!sc.auto_depth && sc.learner.max_depth < 1) read.problem("learner.max_depth", "must be positive or auto");
  if (sc.learner.min_child < 1) read.problem("learner.min_child", "must be positive");
  if (sc.candidate_pool_factor < 1) read.problem("sampler.candidate_factor", "must be positive");
  if (config.limit.initial_batch == 0) read.problem("limit.initial_batch", "must be positive");
  if (config.limit.batch == 0) read.problem("limit.batch", "must be positive");
  if (config.synthetic) {
    if (config.synth.n < 10) read.problem("synth.n", "must be at least 10");
    if (config.synth.p < 2) read.problem("synth.p", "must be at least 2");
    if (!(config.synth.noise_std >= 0.0)) read.problem("synth.noise_std", "must be nonnegative");
    if (!(config.synth.factor_loading >= 0.0 && config.synth.factor_loading < 1.0)) {
      read.problem("synth.factor_loading", "must lie in [0, 1)");
    }
  }

  if (!read.problems().empty()) throw ConfigError(std::move(read.problems()));
  if (config.synthetic && !values.count("dataset.id")) sc.dataset_id = "synthetic";
  return config;
}

}  // namespace coldpref
