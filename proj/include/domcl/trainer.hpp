// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Joint training of encoder, projection head and classifier.
//
// Each step draws N labeled source documents and N unlabeled target
// documents, builds a positive view of each, and optimizes
//
//   w_ce * CE(source originals) + w_con * contrastive + w_ent * entropy(target)
//
// where the contrastive term is pooled over all 4N rows or computed within
// each domain, and the entropy term is switched on from
// `strategy.entropy_start_epoch` onwards.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domcl/augment.hpp"
#include "domcl/checkpoint.hpp"
#include "domcl/config.hpp"
#include "domcl/losses.hpp"
#include "domcl/model.hpp"
#include "domcl/optim.hpp"

namespace domcl {

/// Number of warmup steps: ceil(warmup_fraction * total_steps).
std::int64_t warmup_steps(std::int64_t total_steps, const TrainConfig& config);

/// Linear warmup from 0 to learning_rate, then linear decay to 0 at
/// total_steps. Throws PreconditionError outside [0, total_steps].
double lr_at(std::int64_t step, std::int64_t total_steps, const TrainConfig& config);

/// Walks a shuffled permutation of a pool and reshuffles when it runs out.
/// A pool smaller than the request is sampled with replacement instead.
class PoolSampler {
 public:
  PoolSampler(std::size_t pool_size, Rng rng);

  std::vector<std::size_t> next(std::size_t count);
  bool sampled_with_replacement() const { return with_replacement_; }

 private:
  void reshuffle();

  std::size_t pool_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  bool with_replacement_ = false;
};

struct DocumentPair {
  Document original;
  Document positive;
  std::optional<Label> label;
};

struct MixedBatch {
  std::string source_domain;
  std::string target_domain;
  std::vector<DocumentPair> source;
  std::vector<DocumentPair> target;
  std::vector<std::string> warnings;

  std::vector<std::string> ids() const;
};

/// N source pairs (labeled) and N target pairs (unlabeled); positives come
/// from the augmenters. Deterministic for fixed sampler and rng states.
MixedBatch build_batch(std::span<const LabeledDocument> source, std::span<const Document> target,
                       std::size_t n_pairs, PoolSampler& source_sampler,
                       PoolSampler& target_sampler, const Augmenter& source_augmenter,
                       const Augmenter& target_augmenter, Rng& rng);

struct LossReport {
  double ce = 0.0;
  double con = 0.0;
  double ent = 0.0;                   // raw entropy of the target predictions
  double entropy_contribution = 0.0;  // w_ent * ent when active, else exactly 0
  double total = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;  // before clipping
  bool entropy_active = false;
};

struct TrainState {
  int epoch = 1;
  std::int64_t global_step = 0;
  std::int64_t total_steps = 0;
  double lr_current = 0.0;
  std::vector<double> ce_history;
  std::vector<double> con_history;
  std::vector<double> ent_history;
};

/// The contrastive term over the 4N rows laid out as [source pairs, target
/// pairs], each pair interleaved. Pooled mode treats all rows as one batch;
/// in-domain mode splits at row 2N.
LossWithGrad contrastive_term(const Matrix& z, std::size_t n_pairs, ContrastiveMode mode,
                              const std::string& source_domain, const std::string& target_domain,
                              Temperature tau);

class Trainer {
 public:
  Trainer(TrainConfig config, Model& model);

  /// One optimizer step at lr_at(state.global_step). Throws
  /// NonFiniteLossError (listing the batch ids) on a non-finite loss.
  LossReport train_step(const MixedBatch& batch, TrainState& state);

  AdamW& optimizer() { return optimizer_; }
  const TrainConfig& config() const { return config_; }

 private:
  TrainConfig config_;
  Model& model_;
  AdamW optimizer_;
};

struct TrainInputs {
  const DomainCorpus* source = nullptr;
  const DomainCorpus* target = nullptr;
  const SynonymProvider* synonyms = nullptr;
  const BackTranslationCache* source_cache = nullptr;
  const BackTranslationCache* target_cache = nullptr;
};

struct TrainOutcome {
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics_log;
  std::string config_hash;
  TrainState state;
  std::optional<ShiftMeasure> shift;
  StrategyConfig strategy;
  std::vector<std::string> warnings;
};

/// Labeled source pool for training: a balanced sample when
/// source_labeled_per_class > 0, otherwise every labeled record.
std::vector<LabeledDocument> source_training_pool(const RunConfig& config,
                                                  const DomainCorpus& source);

/// Label shift between the source pool and the target; the target ratio is
/// config.target_ratio when set, else computed from labeled target records.
std::optional<ShiftMeasure> run_shift(const RunConfig& config,
                                      std::span<const LabeledDocument> source_pool,
                                      const DomainCorpus& target);

/// Fills config.train.strategy from the strategy choice.
void resolve_run_strategy(RunConfig& config, const std::optional<ShiftMeasure>& shift);

/// Full training run into config.out_dir: config.snapshot, metrics.jsonl,
/// checkpoints/epoch-<k>/ and checkpoints/final/. With `resume_from`, the
/// run continues after that checkpoint's epoch, refusing (via
/// ManifestMismatchError) when the configuration hash differs.
TrainOutcome train(RunConfig config, const TrainInputs& inputs,
                   const std::optional<std::filesystem::path>& resume_from = std::nullopt);

}  // namespace domcl
