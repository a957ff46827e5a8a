#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "coldpref/rng.hpp"
#include "coldpref/types.hpp"

namespace coldpref {

enum class OracleMode { standard, exponential };
enum class PositivityTransform { identity, min_max_shift, exp };

struct OracleConfig {
  OracleMode mode = OracleMode::exponential;
  PositivityTransform transform = PositivityTransform::min_max_shift;
  double delta = 0.01;                // min_max_shift offset
  std::optional<double> score_scale;  // exponential mode; nullopt means 1 / std(y)
  std::uint64_t seed = 0;

  void validate() const;
};

std::string to_string(OracleMode mode);
std::string to_string(PositivityTransform transform);
OracleMode parse_oracle_mode(const std::string& text);
PositivityTransform parse_transform(const std::string& text);

struct TargetStats {
  double min = 0.0;
  double max = 0.0;
  double std_dev = 0.0;  // population
};

TargetStats target_stats(const Vector& y);

// Bradley-Terry strength of a single item. Only meaningful for the standard
// mode; the exp transform is evaluated through the logistic form instead.
double strength(double y, const OracleConfig& config, double y_min, double y_max);

// Probability that the first item is preferred.
double preference_prob(double y_u, double y_v, const OracleConfig& config, const TargetStats& stats);

struct OracleLabel {
  std::size_t u = 0;
  std::size_t v = 0;
  double prob_u_preferred = 0.5;
  int label = 0;
};

// Noisy expert: looks up true targets and draws a Bernoulli label. Randomness
// comes from a private stream seeded by config.seed, one uniform per query.
class Oracle {
 public:
  Oracle(Vector targets, OracleConfig config);

  OracleLabel label(std::size_t u, std::size_t v);

  // Optional audit log; receives "u,v,prob,label" lines (header written here).
  void set_log(std::ostream* log);

  std::size_t queries() const { return queries_; }
  const TargetStats& stats() const { return stats_; }

 private:
  Vector targets_;
  OracleConfig config_;
  TargetStats stats_;
  Rng rng_;
  std::ostream* log_ = nullptr;
  std::size_t queries_ = 0;
};

}  // namespace coldpref
