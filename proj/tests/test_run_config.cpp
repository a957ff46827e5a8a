#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "coldpref/run_config.hpp"

using namespace coldpref;

namespace {

EnvLookup env_from(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

RunConfig parse(const std::string& text, std::map<std::string, std::string> vars = {}) {
  std::istringstream in(text);
  return parse_run_config(in, env_from(std::move(vars)));
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& key) {
  for (const auto& p : problems)
    if (p.find(key) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("run_config") {
  TEST_CASE("low-data preset holds the protocol constants") {
    const auto c = parse("scenario = low_data\ndataset.synthetic = true\n");
    CHECK(c.scenario.start == 50);
    CHECK(c.scenario.step == 50);
    CHECK(c.scenario.max_queries == 800);
    CHECK(c.scenario.n_runs == 40);
    CHECK(c.scenario.n_test == 20000);
    CHECK(c.scenario.learner.rounds_warmup == 500);
    CHECK(c.scenario.auto_depth);
    CHECK(c.scenario.grid().size() * c.scenario.n_runs * c.policies.size() == 16 * 40 * 3);
    CHECK(c.scenario.dataset_id == "synthetic");
    CHECK(c.synth.n == 2000);
    CHECK(c.synth.p == 10);
    CHECK(c.synth.noise_std == 0.1);
    CHECK(c.scenario.oracle.mode == OracleMode::exponential);
    CHECK_FALSE(c.scenario.oracle.score_scale.has_value());
  }

  TEST_CASE("extended preset grows to ten thousand queries") {
    const auto c = parse("scenario = extended\ndataset.path = data.csv\n");
    CHECK(c.scenario.max_queries == 10000);
    CHECK(c.scenario.n_runs == 1);
    CHECK(c.scenario.grid().size() == 200);
    CHECK(c.dataset_path.value() == "data.csv");
  }

  TEST_CASE("values, comments and lists") {
    const auto c = parse(
        "# comment\n"
        "dataset.path = x.csv   # trailing\n"
        "dataset.id = houses\n"
        "seed = 12\n"
        "warmup.k = 5\n"
        "warmup.alpha = 1e-6\n"
        "oracle.mode = standard\n"
        "oracle.transform = identity\n"
        "oracle.scale = 2.5\n"
        "learner.max_depth = 4\n"
        "policies = random_blank, coldstart_pretrained\n");
    CHECK(c.scenario.dataset_id == "houses");
    CHECK(c.scenario.master_seed == 12);
    CHECK(c.scenario.warmup.k == 5.0);
    CHECK(c.scenario.warmup.alpha == 1e-6);
    CHECK(c.scenario.oracle.mode == OracleMode::standard);
    CHECK(c.scenario.oracle.transform == PositivityTransform::identity);
    CHECK(c.scenario.oracle.score_scale.value() == 2.5);
    CHECK_FALSE(c.scenario.auto_depth);
    CHECK(c.scenario.learner.max_depth == 4);
    REQUIRE(c.policies.size() == 2);
    CHECK(c.policies[1] == PolicyKind::coldstart_pretrained);
  }

  TEST_CASE("environment overrides file values") {
    CHECK(env_name_for("warmup.k") == "COLDPREF_WARMUP_K");
    CHECK(env_name_for("grid.max_queries") == "COLDPREF_GRID_MAX_QUERIES");
    const auto c = parse("dataset.synthetic = true\nwarmup.k = 5\n", {{"COLDPREF_WARMUP_K", "20"}, {"COLDPREF_RUNS", "3"}});
    CHECK(c.scenario.warmup.k == 20.0);
    CHECK(c.scenario.n_runs == 3);
  }

  TEST_CASE("every problem is reported at once") {
    const auto problems = problems_of(
        "dataset.synthetic = true\n"
        "warmup.k = 0.5\n"
        "warmup.alpha = 1\n"
        "grid.step = 0\n"
        "oracle.mode = gaussian\n"
        "bogus = 1\n"
        "runs = many\n");
    CHECK(problems.size() >= 6);
    CHECK(mentions(problems, "warmup.k"));
    CHECK(mentions(problems, "warmup.alpha"));
    CHECK(mentions(problems, "grid.step"));
    CHECK(mentions(problems, "oracle.mode"));
    CHECK(mentions(problems, "exponential"));
    CHECK(mentions(problems, "bogus"));
    CHECK(mentions(problems, "runs"));
  }

  TEST_CASE("range boundaries") {
    CHECK(problems_of("dataset.synthetic = true\nwarmup.k = 1\nwarmup.alpha = 1e-7\n").empty());
    CHECK(problems_of("dataset.synthetic = true\nwarmup.k = 100\nwarmup.alpha = 1e-4\n").empty());
    CHECK_FALSE(problems_of("dataset.synthetic = true\nwarmup.k = 100.5\n").empty());
    CHECK_FALSE(problems_of("dataset.synthetic = true\nwarmup.alpha = 9e-8\n").empty());
    CHECK_FALSE(problems_of("dataset.synthetic = true\ngrid.step = -5\n").empty());
  }

  TEST_CASE("dataset choice and duplicates") {
    CHECK(mentions(problems_of("seed = 1\n"), "dataset"));
    CHECK(mentions(problems_of("dataset.synthetic = true\ndataset.path = a.csv\n"), "mutually exclusive"));
    CHECK(mentions(problems_of("dataset.synthetic = true\nseed = 1\nseed = 2\n"), "duplicate"));
    CHECK(mentions(problems_of("dataset.synthetic = true\njust text\n"), "key = value"));
    CHECK(mentions(problems_of("dataset.synthetic = true\npolicies = random_blank, greedy\n"), "greedy"));
  }

  TEST_CASE("known keys all map to distinct environment names") {
    std::set<std::string> names;
    for (const auto& k : known_config_keys()) CHECK(names.insert(env_name_for(k)).second);
  }
}
