// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include <doctest.h>
#include <json.hpp>

#include "domcl/augment.hpp"
#include "domcl/checkpoint.hpp"
#include "domcl/synthetic.hpp"
#include "support/cli_runner.hpp"
#include "support/oracles.hpp"

using namespace domcl;
using domcl::testing::run_cli;
using domcl::testing::TempDir;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

/// Writes a small source/target pair plus lexicon into `dir`.
void write_small_data(const TempDir& dir) {
  SyntheticOptions o;
  o.seed = 4;
  const auto b = make_synthetic_benchmark(o, {"src", 30, 0, 1.0, 0}, {"tgt", 0, 60, 1.0, 10});
  write_corpus(dir / "src.jsonl", b.source.corpus);
  write_corpus(dir / "tgt.jsonl", b.target.corpus);
  write_corpus(dir / "tgt_test.jsonl", DomainCorpus{"tgt", b.target.test, {}});
  write_lexicon(dir / "lex.tsv", b);
  domcl::testing::write_text(dir / "run.cfg",
                             "data.source = " + (dir / "src.jsonl").string() + "\n" +
                             "data.target = " + (dir / "tgt.jsonl").string() + "\n" +
                             "data.target_ratio = 1.0\n"
                             "augment.method = synonym_substitution\n"
                             "augment.synonyms = " + (dir / "lex.tsv").string() + "\n" +
                             "train.batch_pairs = 8\n"
                             "train.learning_rate = 0.01\n"
                             "model.buckets = 256\n"
                             "model.hidden_dim = 8\n"
                             "model.projection_dim = 8\n");
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
  CHECK(run_cli({"eval"}).code == cli::kUsage);
  CHECK(run_cli({"train", "--encoder", "gpt"}).code == cli::kUsage);
  const auto help = run_cli({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(contains(help.out, "analyze-shift"));
}

TEST_CASE("analyze-shift") {
  SUBCASE("benchmark metadata with a large shift") {
    const auto r = run_cli({"analyze-shift", "--benchmark", "kitchen:dvd"});
    CHECK(r.code == cli::kOk);
    CHECK(contains(r.out, "shift: 7.39"));
    CHECK(contains(r.out, "strategy: in_domain, no entropy"));
    CHECK(contains(r.out, "config_hash: "));
  }
  SUBCASE("benchmark metadata with a small shift") {
    const auto r = run_cli({"analyze-shift", "--benchmark", "books:electronics"});
    CHECK(contains(r.out, "shift: 3.65"));
    CHECK(contains(r.out, "strategy: pooled + entropy"));
  }
  SUBCASE("threshold override") {
    const auto r = run_cli({"analyze-shift", "--benchmark", "books:electronics", "--threshold", "3"});
    CHECK(contains(r.out, "in_domain"));
  }
  SUBCASE("balanced corpora") {
    TempDir dir("cli-shift");
    DomainCorpus s{"s", {}, {}};
    DomainCorpus t{"t", {}, {}};
    for (int i = 0; i < 4; ++i) {
      s.labeled.push_back({{"s" + std::to_string(i), "x", "s"}, i % 2 ? Label::positive : Label::negative});
      t.labeled.push_back({{"t" + std::to_string(i), "y", "t"}, i % 2 ? Label::positive : Label::negative});
    }
    write_corpus(dir / "s.jsonl", s);
    write_corpus(dir / "t.jsonl", t);
    const auto r = run_cli({"analyze-shift", "--source", (dir / "s.jsonl").string(), "--target",
                            (dir / "t.jsonl").string()});
    CHECK(r.code == cli::kOk);
    CHECK(contains(r.out, "shift: 1.00"));
    CHECK(contains(r.out, "pooled + entropy"));
  }
  SUBCASE("errors") {
    CHECK(run_cli({"analyze-shift", "--source", "/nonexistent.jsonl", "--target", "/nope.jsonl"}).code ==
          cli::kInput);
    CHECK(run_cli({"analyze-shift", "--benchmark", "books:music"}).code == cli::kInvalid);
    CHECK(run_cli({"analyze-shift"}).code == cli::kInvalid);
  }
}

TEST_CASE("augment") {
  TempDir dir("cli-augment");
  DomainCorpus c{"d", {}, {}};
  for (int i = 0; i < 10; ++i) c.unlabeled.push_back({"d" + std::to_string(i), "text " + std::to_string(i), "d"});
  write_corpus(dir / "d.jsonl", c);
  const std::string corpus = (dir / "d.jsonl").string();
  const std::string cache = (dir / "cache").string();

  const auto first = run_cli({"augment", "--corpus", corpus, "--domain", "d", "--out", cache});
  CHECK(first.code == cli::kOk);
  CHECK(contains(first.out, "provider_calls: 10"));
  const auto loaded = BackTranslationCache::load(cache);
  CHECK(loaded.size() == 10);
  for (const auto& doc : c.unlabeled) CHECK(*loaded.find(doc.id) == doc.text);

  const auto second = run_cli({"augment", "--corpus", corpus, "--domain", "d", "--out", cache});
  CHECK(second.code == cli::kOk);
  CHECK(contains(second.out, "provider_calls: 0"));
  CHECK(contains(second.out, "reused: 10"));

  CHECK(run_cli({"augment", "--corpus", corpus, "--method", "mixup"}).code == cli::kUsage);
  CHECK(run_cli({"augment", "--corpus", corpus, "--provider", "remote"}).code == cli::kUsage);
  CHECK(run_cli({"augment", "--corpus", (dir / "missing.jsonl").string()}).code == cli::kInput);
  CHECK(run_cli({"augment", "--corpus", corpus, "--domain", "d", "--out", cache, "--pivot", "fr"}).code ==
        cli::kMismatch);
}

TEST_CASE("augment uses the cache root from the environment") {
  TempDir dir("cli-env");
  DomainCorpus c{"d", {}, {{"a", "text", "d"}}};
  write_corpus(dir / "d.jsonl", c);
  ::setenv("DOMCL_CACHE_ROOT", (dir / "root").c_str(), 1);
  const auto r = run_cli({"augment", "--corpus", (dir / "d.jsonl").string(), "--domain", "d"});
  ::unsetenv("DOMCL_CACHE_ROOT");
  CHECK(r.code == cli::kOk);
  CHECK(BackTranslationCache::exists(dir / "root" / "d"));
}

TEST_CASE("train, eval and project") {
  TempDir dir("cli-train");
  write_small_data(dir);
  const std::string cfg = (dir / "run.cfg").string();
  const std::string out = (dir / "run").string();

  const auto train = run_cli({"train", "--config", cfg, "--out", out, "--strategy", "auto"});
  INFO(train.err);
  REQUIRE(train.code == cli::kOk);
  CHECK(contains(train.out, "strategy: pooled + entropy"));
  CHECK(contains(train.out, "config_hash: "));
  CHECK(std::filesystem::exists(dir / "run" / "config.snapshot"));
  CHECK(contains(domcl::testing::read_text(dir / "run" / "config.snapshot"), "strategy.resolved.mode = pooled"));

  const std::string epoch4 = (dir / "run" / "checkpoints" / "epoch-4").string();
  SUBCASE("eval writes a report") {
    const auto r = run_cli({"eval", "--checkpoint", epoch4, "--test", (dir / "tgt_test.jsonl").string()});
    CHECK(r.code == cli::kOk);
    CHECK(contains(r.out, "accuracy: "));
    const auto j = nlohmann::json::parse(domcl::testing::read_text(dir / "run" / "checkpoints" / "epoch-4" / "eval.json"));
    CHECK(j["n_total"] == 20);
    CHECK(j["config_hash"] == load_checkpoint(epoch4).manifest.config_hash);
  }
  SUBCASE("eval on a domain the checkpoint never saw warns") {
    DomainCorpus other{"zeta", {{{"z1", "hello", "zeta"}, Label::positive}}, {}};
    write_corpus(dir / "zeta.jsonl", other);
    const auto r = run_cli({"eval", "--checkpoint", epoch4, "--test", (dir / "zeta.jsonl").string(), "--domain",
                            "zeta", "--out", (dir / "zeta.json").string()});
    CHECK(r.code == cli::kOk);
    CHECK(contains(r.err, "warning"));
  }
  SUBCASE("project exports csv and svg") {
    const auto r = run_cli({"project", "--checkpoint", epoch4, "--source", (dir / "src.jsonl").string(), "--target",
                            (dir / "tgt_test.jsonl").string(), "--svg", "--out", (dir / "viz").string()});
    CHECK(r.code == cli::kOk);
    CHECK(contains(r.out, "rows: 80"));
    CHECK(std::filesystem::exists(dir / "viz" / "projection.csv"));
    CHECK(std::filesystem::exists(dir / "viz" / "projection.svg"));
  }
  SUBCASE("resume with a changed configuration is refused") {
    const auto r = run_cli({"train", "--config", cfg, "--out", out, "--set", "train.tau=0.1", "--resume",
                            (dir / "run" / "checkpoints" / "epoch-2").string()});
    CHECK(r.code == cli::kMismatch);
  }
  SUBCASE("resume with the same configuration succeeds") {
    const auto r = run_cli({"train", "--config", cfg, "--out", out, "--resume",
                            (dir / "run" / "checkpoints" / "epoch-2").string()});
    CHECK(r.code == cli::kOk);
  }
}

TEST_CASE("train argument errors") {
  TempDir dir("cli-train-errors");
  write_small_data(dir);
  const std::string cfg = (dir / "run.cfg").string();
  const std::string out = (dir / "run").string();
  CHECK(run_cli({"train", "--config", cfg, "--out", out, "--strategy", "both"}).code == cli::kInvalid);
  CHECK(run_cli({"train", "--config", cfg, "--out", out, "--strategy", "bogus"}).code == cli::kUsage);
  CHECK(run_cli({"train", "--config", cfg, "--out", out, "--set", "train.nope=1"}).code == cli::kInvalid);
  CHECK(run_cli({"train", "--config", cfg, "--out", out, "--set", "novalue"}).code == cli::kInvalid);
  CHECK(run_cli({"train", "--config", (dir / "absent.cfg").string()}).code == cli::kInput);
  CHECK(run_cli({"train", "--config", cfg, "--encoder", "pretrained"}).code == cli::kInvalid);
  // Back-translation without a cache directory on disk.
  CHECK(run_cli({"train", "--config", cfg, "--out", out, "--set", "augment.method=back_translation", "--set",
                 "augment.cache_dir=" + (dir / "nocache").string()}).code == cli::kInput);
  const auto ablation = run_cli({"train", "--config", cfg, "--out", out, "--strategy", "neither", "--allow-ablation",
                                 "--set", "train.epochs=1"});
  CHECK(ablation.code == cli::kOk);
  CHECK(contains(ablation.out, "[ablation]"));
}
