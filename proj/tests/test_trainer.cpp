// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>
#include <set>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "domcl/error.hpp"
#include "domcl/synthetic.hpp"
#include "domcl/trainer.hpp"
#include "support/oracles.hpp"

using namespace domcl;
using domcl::testing::TempDir;

namespace {

SyntheticBenchmark small_benchmark(std::uint64_t seed = 0) {
  SyntheticOptions options;
  options.seed = seed;
  return make_synthetic_benchmark(options, {"src", 40, 0, 1.0, 0}, {"tgt", 0, 80, 1.0, 20});
}

AugmentationConfig synonym_config() {
  AugmentationConfig c;
  c.method = AugmentMethod::synonym_substitution;
  return c;
}

RunConfig small_run(const std::string& out) {
  RunConfig c;
  c.source_domain = "src";
  c.target_domain = "tgt";
  c.target_ratio = 1.0;
  c.augment = synonym_config();
  c.train.batch_pairs = 8;
  c.train.learning_rate = 1e-2;
  c.model = {256, 8, 8};
  c.out_dir = out;
  return c;
}

std::vector<nlohmann::json> read_metrics(const std::filesystem::path& path) {
  std::vector<nlohmann::json> lines;
  std::istringstream in(domcl::testing::read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(nlohmann::json::parse(line));
  }
  return lines;
}

TrainState make_state(int epoch, std::int64_t step, std::int64_t total) {
  TrainState s;
  s.epoch = epoch;
  s.global_step = step;
  s.total_steps = total;
  return s;
}

struct BatchFixture {
  SyntheticBenchmark bench = small_benchmark();
  Augmenter aug{synonym_config(), &bench.lexicon, nullptr};

  MixedBatch batch(std::size_t n, std::uint64_t seed) {
    PoolSampler s(bench.source.corpus.labeled.size(), make_rng({seed, 1}));
    PoolSampler t(bench.target.corpus.unlabeled.size(), make_rng({seed, 2}));
    Rng rng = make_rng({seed, 3});
    return build_batch(bench.source.corpus.labeled, bench.target.corpus.unlabeled, n, s, t, aug, aug, rng);
  }
};

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig c;
  CHECK(warmup_steps(400, c) == 40);
  CHECK(warmup_steps(30, c) == 3);
  CHECK(warmup_steps(31, c) == 4);
  CHECK(lr_at(0, 400, c) == 0.0);
  CHECK(lr_at(40, 400, c) == 2e-5);
  CHECK(lr_at(400, 400, c) == 0.0);
  CHECK(lr_at(20, 400, c) == doctest::Approx(1e-5));
  CHECK(lr_at(220, 400, c) == doctest::Approx(1e-5));
  CHECK_THROWS_AS(lr_at(401, 400, c), PreconditionError);
  CHECK_THROWS_AS(lr_at(-1, 400, c), PreconditionError);

  std::size_t evaluations = 0;
  double peak = 0.0;
  std::int64_t peak_step = -1;
  for (std::int64_t s = 0; s < 400; ++s, ++evaluations) {
    const double lr = lr_at(s, 400, c);
    if (lr > peak) {
      peak = lr;
      peak_step = s;
    }
  }
  CHECK(evaluations == 400);
  CHECK(peak_step == 40);

  c.warmup_fraction = 0.0;
  CHECK(lr_at(0, 10, c) == 2e-5);
}

TEST_CASE("pool sampler") {
  SUBCASE("each pass is a permutation") {
    PoolSampler s(10, make_rng({1}));
    const auto first = s.next(10);
    CHECK(std::set<std::size_t>(first.begin(), first.end()).size() == 10);
    const auto second = s.next(10);
    CHECK(std::set<std::size_t>(second.begin(), second.end()).size() == 10);
    CHECK_FALSE(s.sampled_with_replacement());
  }
  SUBCASE("small pools are sampled with replacement") {
    PoolSampler s(1, make_rng({1}));
    CHECK(s.next(3) == std::vector<std::size_t>{0, 0, 0});
    CHECK(s.sampled_with_replacement());
  }
  SUBCASE("empty pool") { CHECK_THROWS_AS(PoolSampler(0, make_rng({1})), PreconditionError); }
}

TEST_CASE("build_batch") {
  BatchFixture f;
  SUBCASE("N pairs per domain") {
    const auto b = f.batch(4, 1);
    CHECK(b.source.size() == 4);
    CHECK(b.target.size() == 4);
    CHECK(b.ids().size() == 8);
    for (const auto& p : b.source) CHECK(p.label.has_value());
    for (const auto& p : b.target) CHECK_FALSE(p.label.has_value());
    CHECK(b.source_domain == "src");
    CHECK(b.target_domain == "tgt");
    CHECK(b.warnings.empty());
  }
  SUBCASE("deterministic") {
    const auto a = f.batch(4, 7);
    const auto b = f.batch(4, 7);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(a.source[i].positive.text == b.source[i].positive.text);
      CHECK(a.target[i].original.id == b.target[i].original.id);
    }
  }
  SUBCASE("tiny target pool warns and still forms the batch") {
    const std::vector<Document> one{f.bench.target.corpus.unlabeled.front()};
    PoolSampler s(f.bench.source.corpus.labeled.size(), make_rng({1}));
    PoolSampler t(1, make_rng({2}));
    Rng rng = make_rng({3});
    const auto b = build_batch(f.bench.source.corpus.labeled, one, 3, s, t, f.aug, f.aug, rng);
    CHECK(b.target.size() == 3);
    REQUIRE(b.warnings.size() == 1);
    CHECK(b.warnings[0].find("replacement") != std::string::npos);
  }
}

TEST_CASE("contrastive term layouts") {
  Rng rng = make_rng({5});
  const Matrix z = domcl::testing::random_matrix(12, 4, rng);
  const Temperature tau;
  const auto pooled = contrastive_term(z, 3, ContrastiveMode::pooled, "s", "t", tau);
  CHECK(pooled.value == doctest::Approx(domcl::testing::oracle_contrastive(domcl::testing::to_rows(z), 0.05)));
  const auto split = contrastive_term(z, 3, ContrastiveMode::in_domain, "s", "t", tau);
  CHECK(split.value == doctest::Approx(domcl::testing::oracle_in_domain(
                           domcl::testing::to_rows(z.topRows(6)), domcl::testing::to_rows(z.bottomRows(6)), 0.05)));
  CHECK_THROWS_AS(contrastive_term(z, 2, ContrastiveMode::pooled, "s", "t", tau), PreconditionError);
}

TEST_CASE("train_step") {
  BatchFixture f;
  const auto batch = f.batch(4, 2);

  SUBCASE("entropy is off in the first epoch") {
    Model model = make_toy_model({256, 8, 8}, 1);
    Trainer trainer(TrainConfig{}, model);
    TrainState state = make_state(1, 0, 10);
    const auto r1 = trainer.train_step(batch, state);
    CHECK(r1.entropy_contribution == 0.0);
    CHECK_FALSE(r1.entropy_active);
    CHECK(r1.ent > 0.0);
    state.epoch = 2;
    const auto r2 = trainer.train_step(batch, state);
    CHECK(r2.entropy_active);
    CHECK(r2.entropy_contribution == doctest::Approx(r2.ent));
    CHECK(state.global_step == 2);
  }
  SUBCASE("baseline weights reduce to cross-entropy") {
    Model model = make_toy_model({256, 8, 8}, 1);
    TrainConfig c;
    c.weights = {1, 0, 0};
    Trainer trainer(c, model);
    TrainState state = make_state(3, 0, 10);
    const auto r = trainer.train_step(batch, state);
    CHECK(r.total == r.ce);
  }
  SUBCASE("identical state and batch give identical updates") {
    TrainConfig c;
    c.learning_rate = 1e-2;
    Model a = make_toy_model({256, 8, 8}, 3);
    Model b = make_toy_model({256, 8, 8}, 3);
    Trainer ta(c, a), tb(c, b);
    TrainState sa = make_state(2, 1, 10);
    TrainState sb = make_state(2, 1, 10);
    ta.train_step(batch, sa);
    tb.train_step(batch, sb);
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK((pa[i]->value - pb[i]->value).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("non-finite values stop training with the batch ids") {
    Model model = make_toy_model({256, 8, 8}, 1);
    model.classifier().parameters()[0]->value(0, 0) = std::numeric_limits<double>::quiet_NaN();
    Trainer trainer(TrainConfig{}, model);
    TrainState state = make_state(1, 0, 10);
    const std::string first_id = batch.ids().front();
    CHECK_THROWS_WITH_AS(trainer.train_step(batch, state), doctest::Contains(first_id.c_str()),
                         NonFiniteLossError);
  }
  SUBCASE("lr follows the schedule at the current step") {
    Model model = make_toy_model({256, 8, 8}, 1);
    TrainConfig c;
    Trainer trainer(c, model);
    TrainState state = make_state(1, 5, 50);
    CHECK(trainer.train_step(batch, state).lr == lr_at(5, 50, c));
  }
}

TEST_CASE("full training run") {
  TempDir dir("train");
  const auto bench = small_benchmark();
  const TrainInputs inputs{&bench.source.corpus, &bench.target.corpus, &bench.lexicon, nullptr, nullptr};

  const auto out = train(small_run((dir / "a").string()), inputs);
  const auto metrics = read_metrics(out.metrics_log);
  // ceil(80 / 8) steps per epoch, 4 epochs.
  CHECK(metrics.size() == 40);
  CHECK(out.state.global_step == 40);
  for (const auto& m : metrics) {
    if (m["epoch"] == 1) CHECK(m["ent"].get<double>() == 0.0);
  }
  CHECK(std::filesystem::exists(dir / "a" / "config.snapshot"));
  CHECK(std::filesystem::exists(dir / "a" / "checkpoints" / "epoch-4" / "manifest.json"));
  CHECK(std::filesystem::exists(out.final_checkpoint / "classifier.bin"));
  CHECK(out.strategy.contrastive_mode == ContrastiveMode::pooled);
  CHECK(out.strategy.entropy_enabled);

  SUBCASE("same seed reproduces the metrics log") {
    const auto again = train(small_run((dir / "b").string()), inputs);
    CHECK(domcl::testing::read_text(again.metrics_log) == domcl::testing::read_text(out.metrics_log));
  }
  SUBCASE("resuming from an epoch checkpoint matches the uninterrupted run") {
    const auto resumed = train(small_run((dir / "a").string()), inputs, dir / "a" / "checkpoints" / "epoch-2");
    CHECK(read_metrics(resumed.metrics_log) == metrics);
  }
  SUBCASE("resume refuses a different configuration") {
    auto changed = small_run((dir / "a").string());
    changed.train.tau = 0.1;
    CHECK_THROWS_AS(train(changed, inputs, dir / "a" / "checkpoints" / "epoch-2"), ManifestMismatchError);
  }
}

TEST_CASE("training input errors") {
  TempDir dir("train-errors");
  const auto bench = small_benchmark();
  auto run = small_run((dir / "x").string());

  run.encoder = "pretrained";
  CHECK_THROWS_AS(train(run, {&bench.source.corpus, &bench.target.corpus, &bench.lexicon, nullptr, nullptr}),
                  ValidationError);

  run = small_run((dir / "x").string());
  run.augment.method = AugmentMethod::back_translation;
  BackTranslationCache empty(CacheManifest{"identity", "de", 1, ""});
  CHECK_THROWS_AS(train(run, {&bench.source.corpus, &bench.target.corpus, nullptr, &empty, &empty}),
                  CacheMissError);

  run = small_run((dir / "x").string());
  run.target_ratio = 0.0;  // no labeled target records either
  CHECK_THROWS_AS(train(run, {&bench.source.corpus, &bench.target.corpus, &bench.lexicon, nullptr, nullptr}),
                  ValidationError);
  run.strategy_choice = StrategyChoice::in_domain;
  CHECK_NOTHROW(train(run, {&bench.source.corpus, &bench.target.corpus, &bench.lexicon, nullptr, nullptr}));
}

TEST_CASE("shift helpers") {
  const auto bench = small_benchmark();
  RunConfig c;
  c.target_ratio = 7.39;
  const auto pool = source_training_pool(c, bench.source.corpus);
  CHECK(pool.size() == 80);
  CHECK(run_shift(c, pool, bench.target.corpus)->shift == doctest::Approx(7.39));
  c.source_labeled_per_class = 10;
  CHECK(source_training_pool(c, bench.source.corpus).size() == 20);
  c.target_ratio = 0.0;
  CHECK_FALSE(run_shift(c, pool, bench.target.corpus).has_value());

  c.strategy_choice = StrategyChoice::automatic;
  c.train.strategy.entropy_start_epoch = 3;
  resolve_run_strategy(c, measure_shift(1.0, 1.15));
  CHECK(c.train.strategy.entropy_start_epoch == 3);
  CHECK(c.train.strategy.entropy_enabled);
}
