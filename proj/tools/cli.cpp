// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "domcl/augment.hpp"
#include "domcl/checkpoint.hpp"
#include "domcl/config.hpp"
#include "domcl/corpus.hpp"
#include "domcl/error.hpp"
#include "domcl/evalviz.hpp"
#include "domcl/strategy.hpp"
#include "domcl/synthetic.hpp"
#include "domcl/trainer.hpp"

namespace domcl::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCacheRootEnv = "DOMCL_CACHE_ROOT";

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string encoder;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Config file of `key = value` lines");
  cmd->add_option("--set", flags.overrides, "Config override `key=value` (repeatable)");
  cmd->add_option("--seed", flags.seed, "Random seed");
  cmd->add_option("--out", flags.out, "Output location");
  cmd->add_option("--encoder", flags.encoder, "Text encoder")
      ->check(CLI::IsMember({"toy", "pretrained"}));
}

RunConfig build_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) apply_key_values(config, load_key_values(flags.config_path));
  KeyValues overrides;
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    overrides[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
  }
  apply_key_values(config, overrides);
  if (flags.seed) config.train.seed = *flags.seed;
  if (!flags.out.empty()) config.out_dir = flags.out;
  if (!flags.encoder.empty()) config.encoder = flags.encoder;
  return config;
}

fs::path cache_root(const RunConfig& config) {
  if (!config.cache_dir.empty()) return config.cache_dir;
  if (const char* env = std::getenv(kCacheRootEnv); env != nullptr && *env != '\0') return env;
  return "cache";
}

void print_strategy(std::ostream& out, const StrategyConfig& s) {
  out << "strategy: " << to_string(s.contrastive_mode)
      << (s.entropy_enabled ? " + entropy" : ", no entropy");
  if (s.entropy_enabled) out << " (from epoch " << s.entropy_start_epoch << ")";
  if (s.ablation) out << " [ablation]";
  out << "\nthreshold: " << format_double(s.threshold_used) << '\n';
}

// ---- analyze-shift ---------------------------------------------------------

struct ShiftArgs {
  std::string source, source_domain, target, target_domain, benchmark;
  double target_ratio = 0.0;
  double threshold = StrategyConfig::kDefaultThreshold;
};

int cmd_analyze_shift(const CommonFlags& common, ShiftArgs args, std::ostream& out) {
  RunConfig config = build_config(common);
  if (!args.source.empty()) config.source_path = args.source;
  if (!args.target.empty()) config.target_path = args.target;
  if (!args.source_domain.empty()) config.source_domain = args.source_domain;
  if (!args.target_domain.empty()) config.target_domain = args.target_domain;
  if (args.target_ratio > 0.0) config.target_ratio = args.target_ratio;
  config.strategy_threshold = args.threshold;

  ShiftMeasure shift;
  if (!args.benchmark.empty()) {
    const auto colon = args.benchmark.find(':');
    if (colon == std::string::npos) throw ValidationError("--benchmark expects SOURCE:TARGET");
    const auto s = find_benchmark_domain(args.benchmark.substr(0, colon));
    const auto t = find_benchmark_domain(args.benchmark.substr(colon + 1));
    if (!s || !t) throw ValidationError("unknown benchmark domain in '" + args.benchmark + "'");
    // Benchmark labeled sets are balanced; the shift comes from the target pool.
    shift = measure_shift(1.0, t->unlabeled_pos_neg_ratio);
    config.source_domain = std::string(s->name);
    config.target_domain = std::string(t->name);
  } else {
    if (config.source_path.empty() || config.target_path.empty()) {
      throw ValidationError("analyze-shift needs --source and --target (or --benchmark)");
    }
    if (config.source_domain.empty()) config.source_domain = fs::path(config.source_path).stem();
    if (config.target_domain.empty()) config.target_domain = fs::path(config.target_path).stem();
    const auto source = load_corpus(config.source_path, config.source_domain);
    const auto target = load_corpus(config.target_path, config.target_domain);
    const auto pool = source_training_pool(config, source);
    const auto measured = run_shift(config, pool, target);
    if (!measured) {
      throw ValidationError(
          "cannot measure label shift: need labeled source records of both classes and a target "
          "ratio (--target-ratio or labeled target records)");
    }
    shift = *measured;
  }

  config.strategy_choice = StrategyChoice::automatic;
  resolve_run_strategy(config, shift);
  out << "source: " << config.source_domain << " pos:neg " << format_double(shift.source_ratio) << '\n';
  out << "target: " << config.target_domain << " pos:neg " << format_double(shift.target_ratio) << '\n';
  out << "shift: " << std::fixed << std::setprecision(2) << shift.shift << std::defaultfloat << '\n';
  print_strategy(out, config.train.strategy);
  out << "config_hash: " << config_hash(config) << '\n';
  return kOk;
}

// ---- augment ---------------------------------------------------------------

struct AugmentArgs {
  std::string corpus, domain, method = "back_translation", provider = "identity", pivot = "de";
  int beam = 1;
};

int cmd_augment(const CommonFlags& common, const AugmentArgs& args, std::ostream& out,
                std::ostream& err) {
  RunConfig config = build_config(common);
  const auto method = parse_augment_method(args.method);
  if (!method) {
    err << "error: unknown augmentation method '" << args.method << "'\n";
    return kUsage;
  }
  if (*method == AugmentMethod::synonym_substitution) {
    err << "error: synonym substitution runs online during training; only back_translation is "
           "precomputed\n";
    return kUsage;
  }
  if (args.provider != "identity") {
    err << "error: unknown translation provider '" << args.provider << "'\n";
    return kUsage;
  }
  config.augment.method = *method;
  config.augment.pivot_language = args.pivot;
  config.augment.beam = args.beam;

  const std::string domain = args.domain.empty() ? fs::path(args.corpus).stem().string() : args.domain;
  const auto corpus = load_corpus(args.corpus, domain);
  const fs::path dir = common.out.empty() ? cache_root(config) / domain : fs::path(common.out);

  IdentityTranslationProvider provider;
  const auto report = back_translate_to_directory(corpus, provider, config.augment, dir);
  out << "cache: " << dir.string() << '\n';
  out << "provider_calls: " << report.provider_calls << '\n';
  out << "reused: " << report.reused << '\n';
  out << "failed: " << report.failed_ids.size() << '\n';
  for (std::size_t i = 0; i < report.failed_ids.size(); ++i) {
    err << "warning: " << report.failed_ids[i] << ": " << report.failure_messages[i] << '\n';
  }
  out << "config_hash: " << config_hash(config) << '\n';
  return report.failed_ids.empty() ? kOk : kIncomplete;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string source, source_domain, target, target_domain, strategy, resume, synonyms;
  bool allow_ablation = false;
};

int cmd_train(const CommonFlags& common, const TrainArgs& args, std::ostream& out,
              std::ostream& err) {
  RunConfig config = build_config(common);
  if (!args.source.empty()) config.source_path = args.source;
  if (!args.target.empty()) config.target_path = args.target;
  if (!args.source_domain.empty()) config.source_domain = args.source_domain;
  if (!args.target_domain.empty()) config.target_domain = args.target_domain;
  if (!args.synonyms.empty()) config.synonyms_path = args.synonyms;
  if (args.allow_ablation) config.allow_ablation = true;
  if (!args.strategy.empty()) {
    const auto choice = parse_strategy_choice(args.strategy);
    if (!choice) {
      err << "error: unknown strategy '" << args.strategy << "'\n";
      return kUsage;
    }
    config.strategy_choice = *choice;
  }
  if (config.source_path.empty() || config.target_path.empty()) {
    throw ValidationError("train needs data.source and data.target");
  }
  if (config.source_domain.empty()) config.source_domain = fs::path(config.source_path).stem();
  if (config.target_domain.empty()) config.target_domain = fs::path(config.target_path).stem();

  const auto source = load_corpus(config.source_path, config.source_domain);
  const auto target = load_corpus(config.target_path, config.target_domain);

  std::optional<LexiconSynonymProvider> lexicon;
  std::optional<BackTranslationCache> source_cache, target_cache;
  if (config.augment.method == AugmentMethod::synonym_substitution) {
    if (config.synonyms_path.empty()) throw ValidationError("synonym substitution needs augment.synonyms");
    lexicon = LexiconSynonymProvider::load(config.synonyms_path);
  } else {
    const fs::path root = cache_root(config);
    source_cache = BackTranslationCache::load(root / config.source_domain);
    target_cache = BackTranslationCache::load(root / config.target_domain);
  }

  TrainInputs inputs{&source, &target, lexicon ? &*lexicon : nullptr,
                     source_cache ? &*source_cache : nullptr,
                     target_cache ? &*target_cache : nullptr};
  std::optional<fs::path> resume;
  if (!args.resume.empty()) resume = fs::path(args.resume);

  const auto outcome = train(config, inputs, resume);
  for (const auto& w : outcome.warnings) err << "warning: " << w << '\n';
  if (outcome.shift) out << "shift: " << format_double(outcome.shift->shift) << '\n';
  print_strategy(out, outcome.strategy);
  out << "steps: " << outcome.state.global_step << '\n';
  out << "metrics: " << outcome.metrics_log.string() << '\n';
  out << "checkpoint: " << outcome.final_checkpoint.string() << '\n';
  out << "config_hash: " << outcome.config_hash << '\n';
  return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, test, domain;
};

int cmd_eval(const CommonFlags& common, const EvalArgs& args, std::ostream& out, std::ostream& err) {
  build_config(common);  // validates --config/--set even though eval only reads the checkpoint
  auto loaded = load_checkpoint(args.checkpoint);
  const std::string domain = args.domain.empty() ? loaded.manifest.target_domain : args.domain;
  const auto corpus = load_corpus(args.test, domain);
  if (corpus.labeled.empty()) throw ValidationError("test file has no labeled records");

  auto report = evaluate(loaded.model, corpus.labeled, loaded.manifest.config_hash);
  if (domain != loaded.manifest.source_domain && domain != loaded.manifest.target_domain) {
    report.warnings.push_back("domain '" + domain + "' is neither the source nor the target of this checkpoint");
  }
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  const fs::path path = common.out.empty() ? fs::path(args.checkpoint) / "eval.json" : fs::path(common.out);
  write_eval_report(path, report);
  out << "accuracy: " << format_double(report.accuracy) << " (" << report.n_correct << "/"
      << report.n_total << ")\n";
  out << "report: " << path.string() << '\n';
  out << "config_hash: " << loaded.manifest.config_hash << '\n';
  return kOk;
}

// ---- project ---------------------------------------------------------------

struct ProjectArgs {
  std::string checkpoint, source, source_domain, target, target_domain, reducer = "pca", command;
  bool svg = false;
};

int cmd_project(const CommonFlags& common, const ProjectArgs& args, std::ostream& out) {
  const RunConfig config = build_config(common);
  auto loaded = load_checkpoint(args.checkpoint);
  const std::string sd = args.source_domain.empty() ? loaded.manifest.source_domain : args.source_domain;
  const std::string td = args.target_domain.empty() ? loaded.manifest.target_domain : args.target_domain;
  std::vector<LabeledDocument> source, target;
  if (!args.source.empty()) source = load_corpus(args.source, sd).labeled;
  if (!args.target.empty()) target = load_corpus(args.target, td).labeled;

  std::unique_ptr<Reducer> reducer;
  if (args.reducer == "pca") {
    reducer = std::make_unique<PcaReducer>();
  } else {
    if (args.command.empty()) throw ValidationError("--reducer command needs --reducer-command");
    reducer = std::make_unique<CommandReducer>(args.command, config.train.seed);
  }
  const auto projection = export_projection(loaded.model, source, target, *reducer);
  const fs::path dir = common.out.empty() ? fs::path(args.checkpoint) : fs::path(common.out);
  fs::create_directories(dir);
  write_projection_csv(dir / "projection.csv", projection);
  out << "rows: " << projection.rows.size() << '\n';
  out << "csv: " << (dir / "projection.csv").string() << '\n';
  if (args.svg) {
    write_projection_svg(dir / "projection.svg", projection);
    out << "svg: " << (dir / "projection.svg").string() << '\n';
  }
  out << "config_hash: " << loaded.manifest.config_hash << '\n';
  return kOk;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string source_domain = "alpha", target_domain = "beta";
  double target_ratio = 1.0;
  std::size_t labeled_per_class = 1000, unlabeled = 3000, test_per_class = 500;
};

int cmd_synth(const CommonFlags& common, const SynthArgs& args, std::ostream& out) {
  const RunConfig config = build_config(common);
  SyntheticOptions options;
  options.seed = config.train.seed;
  const auto bench = make_synthetic_benchmark(
      options, {args.source_domain, args.labeled_per_class, 0, 1.0, 0},
      {args.target_domain, 0, args.unlabeled, args.target_ratio, args.test_per_class});
  const fs::path dir = common.out.empty() ? fs::path("synthetic") : fs::path(common.out);
  fs::create_directories(dir);
  write_corpus(dir / (args.source_domain + ".jsonl"), bench.source.corpus);
  write_corpus(dir / (args.target_domain + ".jsonl"), bench.target.corpus);
  DomainCorpus test{args.target_domain, bench.target.test, {}};
  write_corpus(dir / (args.target_domain + "_test.jsonl"), test);
  write_lexicon(dir / "lexicon.tsv", bench);
  out << "wrote " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contrastive cross-domain sentiment training"};
  app.require_subcommand(1);

  CommonFlags common;
  ShiftArgs shift_args;
  auto* shift_cmd = app.add_subcommand("analyze-shift", "Measure label shift and recommend a strategy");
  add_common(shift_cmd, common);
  shift_cmd->add_option("--source", shift_args.source, "Source corpus (.jsonl)");
  shift_cmd->add_option("--source-domain", shift_args.source_domain, "Source domain tag");
  shift_cmd->add_option("--target", shift_args.target, "Target corpus (.jsonl)");
  shift_cmd->add_option("--target-domain", shift_args.target_domain, "Target domain tag");
  shift_cmd->add_option("--target-ratio", shift_args.target_ratio, "Estimated target pos:neg ratio");
  shift_cmd->add_option("--benchmark", shift_args.benchmark, "Published benchmark pair SOURCE:TARGET");
  shift_cmd->add_option("--threshold", shift_args.threshold, "Shift above which in-domain contrast is used");

  AugmentArgs aug_args;
  auto* aug_cmd = app.add_subcommand("augment", "Precompute back-translations into a cache directory");
  add_common(aug_cmd, common);
  aug_cmd->add_option("--corpus", aug_args.corpus, "Corpus (.jsonl)")->required();
  aug_cmd->add_option("--domain", aug_args.domain, "Domain tag");
  aug_cmd->add_option("--method", aug_args.method, "Augmentation method");
  aug_cmd->add_option("--provider", aug_args.provider, "Translation provider");
  aug_cmd->add_option("--pivot", aug_args.pivot, "Pivot language");
  aug_cmd->add_option("--beam", aug_args.beam, "Beam size")->check(CLI::PositiveNumber);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train encoder, projection head and classifier");
  add_common(train_cmd, common);
  train_cmd->add_option("--source", train_args.source, "Source corpus (.jsonl)");
  train_cmd->add_option("--source-domain", train_args.source_domain, "Source domain tag");
  train_cmd->add_option("--target", train_args.target, "Target corpus (.jsonl)");
  train_cmd->add_option("--target-domain", train_args.target_domain, "Target domain tag");
  train_cmd->add_option("--synonyms", train_args.synonyms, "Synonym lexicon (word<TAB>synonyms)");
  train_cmd->add_option("--strategy", train_args.strategy,
                        "auto|pooled-entropy|in-domain|both|neither");
  train_cmd->add_flag("--allow-ablation", train_args.allow_ablation, "Permit both/neither strategies");
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint directory to resume from");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled test file");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint directory")->required();
  eval_cmd->add_option("--test", eval_args.test, "Labeled test corpus (.jsonl)")->required();
  eval_cmd->add_option("--domain", eval_args.domain, "Domain tag of the test file");

  ProjectArgs proj_args;
  auto* proj_cmd = app.add_subcommand("project", "Export 2-D projections of hidden features");
  add_common(proj_cmd, common);
  proj_cmd->add_option("--checkpoint", proj_args.checkpoint, "Checkpoint directory")->required();
  proj_cmd->add_option("--source", proj_args.source, "Labeled source documents");
  proj_cmd->add_option("--source-domain", proj_args.source_domain, "Source domain tag");
  proj_cmd->add_option("--target", proj_args.target, "Labeled target documents");
  proj_cmd->add_option("--target-domain", proj_args.target_domain, "Target domain tag");
  proj_cmd->add_option("--reducer", proj_args.reducer, "pca|command")->check(CLI::IsMember({"pca", "command"}));
  proj_cmd->add_option("--reducer-command", proj_args.command, "External reducer program");
  proj_cmd->add_flag("--svg", proj_args.svg, "Also render a scatter plot");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic two-domain benchmark");
  add_common(synth_cmd, common);
  synth_cmd->add_option("--source-domain", synth_args.source_domain, "Source domain name");
  synth_cmd->add_option("--target-domain", synth_args.target_domain, "Target domain name");
  synth_cmd->add_option("--target-ratio", synth_args.target_ratio, "Target unlabeled pos:neg ratio");
  synth_cmd->add_option("--labeled-per-class", synth_args.labeled_per_class, "Source labeled per class");
  synth_cmd->add_option("--unlabeled", synth_args.unlabeled, "Target unlabeled documents");
  synth_cmd->add_option("--test-per-class", synth_args.test_per_class, "Target test documents per class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (*shift_cmd) return cmd_analyze_shift(common, shift_args, out);
    if (*aug_cmd) return cmd_augment(common, aug_args, out, err);
    if (*train_cmd) {
      if (common.encoder == "pretrained") {
        err << "error: the pretrained-transformer encoder adapter is not part of this build\n";
        return kInvalid;
      }
      return cmd_train(common, train_args, out, err);
    }
    if (*eval_cmd) return cmd_eval(common, eval_args, out, err);
    if (*proj_cmd) return cmd_project(common, proj_args, out);
    if (*synth_cmd) return cmd_synth(common, synth_args, out);
  } catch (const ManifestMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kMismatch;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const NonFiniteLossError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace domcl::cli
