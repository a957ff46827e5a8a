#include "coldpref/oracle_sim.hpp"

#include <cmath>
#include <ostream>

#include "coldpref/csv.hpp"
#include "coldpref/errors.hpp"

namespace coldpref {

void OracleConfig::validate() const {
  if (transform == PositivityTransform::min_max_shift && !(delta > 0.0)) {
    throw InputError("oracle delta must be positive for min_max_shift");
  }
  if (score_scale && !(*score_scale > 0.0 && std::isfinite(*score_scale))) {
    throw InputError("oracle score scale must be positive");
  }
}

std::string to_string(OracleMode mode) { return mode == OracleMode::standard ? "standard" : "exponential"; }

std::string to_string(PositivityTransform transform) {
  switch (transform) {
    case PositivityTransform::identity:
      return "identity";
    case PositivityTransform::min_max_shift:
      return "min_max_shift";
    case PositivityTransform::exp:
      return "exp";
  }
  return "unknown";
}

OracleMode parse_oracle_mode(const std::string& text) {
  if (text == "standard") return OracleMode::standard;
  if (text == "exponential") return OracleMode::exponential;
  throw InputError("unknown oracle mode '" + text + "' (valid: standard, exponential)");
}

PositivityTransform parse_transform(const std::string& text) {
  if (text == "identity") return PositivityTransform::identity;
  if (text == "min_max_shift") return PositivityTransform::min_max_shift;
  if (text == "exp") return PositivityTransform::exp;
  throw InputError("unknown positivity transform '" + text + "' (valid: identity, min_max_shift, exp)");
}

TargetStats target_stats(const Vector& y) {
  if (y.size() == 0) throw InputError("empty target vector");
  TargetStats stats;
  stats.min = y.minCoeff();
  stats.max = y.maxCoeff();
  const double mean = y.mean();
  stats.std_dev = std::sqrt((y.array() - mean).square().mean());
  return stats;
}

double strength(double y, const OracleConfig& config, double y_min, double y_max) {
  if (!std::isfinite(y)) throw InputError("non-finite target value");
  if (y_max < y_min) throw InputError("y_max must not be below y_min");
  switch (config.transform) {
    case PositivityTransform::identity:
      if (!(y > 0.0)) {
        throw InputError("identity strength needs positive targets; use min_max_shift or exponential mode");
      }
      return y;
    case PositivityTransform::min_max_shift:
      if (y_max == y_min) return config.delta;
      return (y - y_min) / (y_max - y_min) + config.delta;
    case PositivityTransform::exp:
      return std::exp(y);
  }
  return y;
}

double preference_prob(double y_u, double y_v, const OracleConfig& config, const TargetStats& stats) {
  if (!std::isfinite(y_u) || !std::isfinite(y_v)) throw InputError("non-finite target value");
  const bool logistic = config.mode == OracleMode::exponential || config.transform == PositivityTransform::exp;
  if (logistic) {
    double scale = 1.0;
    if (config.score_scale) {
      scale = *config.score_scale;
    } else if (config.mode == OracleMode::exponential) {
      if (!(stats.std_dev > 0.0)) throw InputError("targets are constant; set an explicit score scale");
      scale = 1.0 / stats.std_dev;
    }
    const double diff = scale * (y_u - y_v);
    return 1.0 / (1.0 + std::exp(-diff));
  }
  const double beta_u = strength(y_u, config, stats.min, stats.max);
  const double beta_v = strength(y_v, config, stats.min, stats.max);
  return beta_u / (beta_u + beta_v);
}

Oracle::Oracle(Vector targets, OracleConfig config)
    : targets_(std::move(targets)), config_(config), stats_(target_stats(targets_)), rng_(config.seed) {
  config_.validate();
  if (config_.mode == OracleMode::standard && config_.transform == PositivityTransform::identity &&
      !(stats_.min > 0.0)) {
    throw InputError("identity strength needs positive targets; use min_max_shift or exponential mode");
  }
}

void Oracle::set_log(std::ostream* log) {
  log_ = log;
  if (log_ != nullptr) *log_ << "u,v,prob,label\n";
}

OracleLabel Oracle::label(std::size_t u, std::size_t v) {
  const auto n = static_cast<std::size_t>(targets_.size());
  if (u >= n || v >= n) throw InputError("oracle query index out of range");
  if (u == v) throw InputError("degenerate pair: u == v");
  OracleLabel result;
  result.u = u;
  result.v = v;
  result.prob_u_preferred = preference_prob(targets_(static_cast<Eigen::Index>(u)),
                                            targets_(static_cast<Eigen::Index>(v)), config_, stats_);
  result.label = rng_.uniform() < result.prob_u_preferred ? 1 : 0;
  ++queries_;
  if (log_ != nullptr) {
    *log_ << u << ',' << v << ',' << csv::format_double(result.prob_u_preferred) << ',' << result.label << '\n';
  }
  return result;
}

}  // namespace coldpref
