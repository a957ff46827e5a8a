#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coldpref/errors.hpp"
#include "coldpref/oracle_sim.hpp"
#include "coldpref/rng.hpp"

using namespace coldpref;

namespace {

OracleConfig standard_identity() {
  OracleConfig c;
  c.mode = OracleMode::standard;
  c.transform = PositivityTransform::identity;
  return c;
}

OracleConfig exponential(double scale) {
  OracleConfig c;
  c.mode = OracleMode::exponential;
  c.score_scale = scale;
  return c;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("strength transforms") {
    OracleConfig c = standard_identity();
    CHECK(strength(3.0, c, 0.0, 10.0) == 3.0);
    c.transform = PositivityTransform::min_max_shift;
    c.delta = 0.01;
    CHECK(strength(2.0, c, 2.0, 7.0) == doctest::Approx(0.01));
    CHECK(strength(7.0, c, 2.0, 7.0) == doctest::Approx(1.01));
    c.transform = PositivityTransform::exp;
    CHECK(strength(1.0, c, 0.0, 2.0) == doctest::Approx(std::exp(1.0)));
    c.transform = PositivityTransform::identity;
    CHECK_THROWS_AS(strength(-1.0, c, -1.0, 1.0), InputError);
  }

  TEST_CASE("preference probability examples") {
    const TargetStats stats{0.0, 10.0, 1.0};
    CHECK(preference_prob(3.0, 1.0, standard_identity(), stats) == doctest::Approx(0.75));
    CHECK(preference_prob(std::log(3.0), 0.0, exponential(1.0), stats) == doctest::Approx(0.75));
    CHECK(preference_prob(4.0, 4.0, standard_identity(), stats) == 0.5);
    CHECK(preference_prob(4.0, 4.0, exponential(2.0), stats) == 0.5);
  }

  TEST_CASE("default exponential scale is the inverse population std") {
    Vector y(4);
    y << 1, 2, 3, 4;
    const auto stats = target_stats(y);
    CHECK(stats.std_dev == doctest::Approx(std::sqrt(1.25)));
    OracleConfig c;
    const double expected = 1.0 / (1.0 + std::exp(-(4.0 - 1.0) / std::sqrt(1.25)));
    CHECK(preference_prob(4.0, 1.0, c, stats) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("complementarity, monotonicity and shift invariance") {
    Rng rng(12);
    const TargetStats stats{-5.0, 5.0, 1.7};
    std::vector<OracleConfig> configs{exponential(0.8), OracleConfig{}};
    OracleConfig shifted;
    shifted.mode = OracleMode::standard;
    configs.push_back(shifted);
    OracleConfig expo = shifted;
    expo.transform = PositivityTransform::exp;
    configs.push_back(expo);
    for (const auto& c : configs) {
      for (int i = 0; i < 2000; ++i) {
        const double a = -5.0 + 10.0 * rng.uniform();
        const double b = -5.0 + 10.0 * rng.uniform();
        CHECK(std::abs(preference_prob(a, b, c, stats) + preference_prob(b, a, c, stats) - 1.0) <= 1e-12);
        const double a2 = std::min(5.0, a + 0.1 + rng.uniform());
        if (a2 > a) CHECK(preference_prob(a2, b, c, stats) > preference_prob(a, b, c, stats));
      }
    }
    const auto c = exponential(0.8);
    for (int i = 0; i < 500; ++i) {
      const double a = rng.normal(), b = rng.normal(), s = 3.0 * rng.normal();
      CHECK(preference_prob(a + s, b + s, c, stats) == doctest::Approx(preference_prob(a, b, c, stats)).epsilon(1e-12));
    }
  }

  TEST_CASE("Monte-Carlo frequency within three binomial sigmas") {
    for (double pi : {0.1, 0.5, 0.75, 0.9}) {
      Vector y(2);
      y << std::log(pi / (1.0 - pi)), 0.0;
      OracleConfig c = exponential(1.0);
      c.seed = 1000 + static_cast<std::uint64_t>(pi * 100);
      Oracle oracle(y, c);
      const int draws = 100000;
      int ones = 0;
      for (int i = 0; i < draws; ++i) ones += oracle.label(0, 1).label;
      const double freq = static_cast<double>(ones) / draws;
      CHECK(std::abs(freq - pi) <= 3.0 * std::sqrt(pi * (1.0 - pi) / draws));
      CHECK(oracle.queries() == static_cast<std::size_t>(draws));
    }
  }

  TEST_CASE("near-certain preference always yields label one") {
    Vector y(2);
    y << 100.0, 0.0;
    Oracle oracle(y, exponential(10.0));
    for (int i = 0; i < 1000; ++i) CHECK(oracle.label(0, 1).label == 1);
  }

  TEST_CASE("fair pair frequency within 0.005 of one half") {
    Vector y(2);
    y << 1.0, 1.0;
    Oracle oracle(y, exponential(1.0));
    int ones = 0;
    for (int i = 0; i < 100000; ++i) ones += oracle.label(0, 1).label;
    CHECK(std::abs(ones / 100000.0 - 0.5) < 0.005);
  }

  TEST_CASE("fixed seed gives the same label sequence and log") {
    Vector y(5);
    y << 0.3, -1.2, 2.2, 0.9, 0.0;
    OracleConfig c;
    c.seed = 55;
    Oracle a(y, c), b(y, c);
    std::ostringstream log_a, log_b;
    a.set_log(&log_a);
    b.set_log(&log_b);
    for (int i = 0; i < 200; ++i) {
      const std::size_t u = static_cast<std::size_t>(i % 5), v = static_cast<std::size_t>((i * 3 + 1) % 5);
      if (u == v) continue;
      CHECK(a.label(u, v).label == b.label(u, v).label);
    }
    CHECK(log_a.str() == log_b.str());
    CHECK(log_a.str().rfind("u,v,prob,label\n", 0) == 0);
  }

  TEST_CASE("oracle validation") {
    Vector y(3);
    y << 1, 2, 3;
    Oracle oracle(y, OracleConfig{});
    CHECK_THROWS_AS(oracle.label(1, 1), InputError);
    CHECK_THROWS_AS(oracle.label(0, 3), InputError);
    CHECK_THROWS_AS(parse_oracle_mode("gaussian"), InputError);
    CHECK_THROWS_AS(parse_transform("square"), InputError);
    CHECK(parse_oracle_mode(to_string(OracleMode::standard)) == OracleMode::standard);
    CHECK(parse_transform(to_string(PositivityTransform::min_max_shift)) == PositivityTransform::min_max_shift);
    OracleConfig bad;
    bad.score_scale = -1.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
  }
}
