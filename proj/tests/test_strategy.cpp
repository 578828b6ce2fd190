// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "domcl/error.hpp"
#include "domcl/random.hpp"
#include "domcl/strategy.hpp"

using namespace domcl;

TEST_CASE("measure_shift") {
  CHECK(measure_shift(1.0, 7.39).shift == doctest::Approx(7.39));
  CHECK(measure_shift(1.0, 1.0).shift == 1.0);
  CHECK(measure_shift(1.0, 1.0 / 7.39).shift == doctest::Approx(7.39));
  CHECK(measure_shift(LabelDistribution{10, 10}, LabelDistribution{30, 10}).shift == doctest::Approx(3.0));
  CHECK_THROWS_AS(measure_shift(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(measure_shift(LabelDistribution{5, 0}, LabelDistribution{1, 1}), ValidationError);

  Rng rng = make_rng({1});
  for (int t = 0; t < 100; ++t) {
    const double a = 0.05 + 20 * uniform01(rng);
    const double b = 0.05 + 20 * uniform01(rng);
    const double s = measure_shift(a, b).shift;
    CHECK(s >= 1.0);
    CHECK(measure_shift(1 / a, 1 / b).shift == doctest::Approx(s));
    CHECK(measure_shift(b, a).shift == doctest::Approx(s));
  }
}

TEST_CASE("select_strategy") {
  for (double shift : {1.0, 1.15, 3.65, 5.0}) {
    const auto s = select_strategy(measure_shift(1.0, shift));
    CHECK(s.contrastive_mode == ContrastiveMode::pooled);
    CHECK(s.entropy_enabled);
  }
  for (double shift : {5.01, 7.39}) {
    const auto s = select_strategy(measure_shift(1.0, shift));
    CHECK(s.contrastive_mode == ContrastiveMode::in_domain);
    CHECK_FALSE(s.entropy_enabled);
  }
  CHECK(select_strategy(measure_shift(1.0, 3.65), 3.0).contrastive_mode == ContrastiveMode::in_domain);
  CHECK(select_strategy(measure_shift(1.0, 2.0)).threshold_used == 5.0);
  CHECK_THROWS_AS(select_strategy(measure_shift(1.0, 2.0), 1.0), ValidationError);
}

TEST_CASE("strategy config enforces one technique") {
  StrategyConfig s;
  CHECK_NOTHROW(s.validate());
  s.contrastive_mode = ContrastiveMode::in_domain;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.ablation = true;
  CHECK_NOTHROW(s.validate());
  s = StrategyConfig{};
  s.entropy_enabled = false;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("resolve_strategy") {
  const auto shift = measure_shift(1.0, 7.39);
  CHECK(resolve_strategy(StrategyChoice::automatic, shift, 5.0, false).contrastive_mode ==
        ContrastiveMode::in_domain);
  CHECK_THROWS_AS(resolve_strategy(StrategyChoice::automatic, std::nullopt, 5.0, false), ValidationError);

  const auto forced = resolve_strategy(StrategyChoice::pooled_entropy, shift, 5.0, false);
  CHECK(forced.contrastive_mode == ContrastiveMode::pooled);
  CHECK(forced.entropy_enabled);
  CHECK(resolve_strategy(StrategyChoice::in_domain, std::nullopt, 5.0, false).entropy_enabled == false);

  CHECK_THROWS_AS(resolve_strategy(StrategyChoice::both, shift, 5.0, false), ValidationError);
  const auto both = resolve_strategy(StrategyChoice::both, shift, 5.0, true);
  CHECK(both.ablation);
  CHECK(both.entropy_enabled);
  CHECK(both.contrastive_mode == ContrastiveMode::in_domain);
  const auto neither = resolve_strategy(StrategyChoice::neither, shift, 5.0, true);
  CHECK_FALSE(neither.entropy_enabled);
  CHECK(neither.contrastive_mode == ContrastiveMode::pooled);
}

TEST_CASE("strategy choice names") {
  CHECK(parse_strategy_choice("auto") == StrategyChoice::automatic);
  CHECK(parse_strategy_choice("pooled-entropy") == StrategyChoice::pooled_entropy);
  CHECK(parse_strategy_choice("in-domain") == StrategyChoice::in_domain);
  CHECK_FALSE(parse_strategy_choice("both-ish").has_value());
  for (auto c : {StrategyChoice::automatic, StrategyChoice::pooled_entropy, StrategyChoice::in_domain,
                 StrategyChoice::both, StrategyChoice::neither}) {
    CHECK(parse_strategy_choice(to_string(c)) == c);
  }
}
