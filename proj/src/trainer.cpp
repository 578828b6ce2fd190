// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "domcl/error.hpp"

namespace domcl {

std::int64_t warmup_steps(std::int64_t total_steps, const TrainConfig& config) {
  // The epsilon keeps 0.1 * 30 = 3.0000000000000004 from rounding up to 4.
  return static_cast<std::int64_t>(
      std::ceil(config.warmup_fraction * static_cast<double>(total_steps) - 1e-9));
}

double lr_at(std::int64_t step, std::int64_t total_steps, const TrainConfig& config) {
  if (total_steps < 1 || step < 0 || step > total_steps) {
    throw PreconditionError("lr_at: step " + std::to_string(step) + " outside [0, " +
                            std::to_string(total_steps) + "]");
  }
  const std::int64_t warmup = warmup_steps(total_steps, config);
  if (step <= warmup && warmup > 0) {
    return config.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
  }
  return config.learning_rate * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

PoolSampler::PoolSampler(std::size_t pool_size, Rng rng) : pool_size_(pool_size), rng_(rng) {
  if (pool_size_ == 0) throw PreconditionError("cannot sample from an empty pool");
  order_.resize(pool_size_);
  reshuffle();
}

void PoolSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order_), rng_);
  cursor_ = 0;
}

std::vector<std::size_t> PoolSampler::next(std::size_t count) {
  std::vector<std::size_t> out;
  out.reserve(count);
  if (count > pool_size_) {
    with_replacement_ = true;
    for (std::size_t i = 0; i < count; ++i) out.push_back(uniform_index(rng_, pool_size_));
    return out;
  }
  while (out.size() < count) {
    if (cursor_ == order_.size()) reshuffle();
    out.push_back(order_[cursor_++]);
  }
  return out;
}

std::vector<std::string> MixedBatch::ids() const {
  std::vector<std::string> out;
  for (const auto& p : source) out.push_back(p.original.id);
  for (const auto& p : target) out.push_back(p.original.id);
  return out;
}

namespace {

DocumentPair make_pair(const Document& doc, std::optional<Label> label,
                       const Augmenter& augmenter, Rng& rng) {
  try {
    return {doc, augmenter.make_positive(doc, rng), label};
  } catch (const CacheMissError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("augmentation failed for document '" + doc.id + "': " + e.what());
  }
}

}  // namespace

MixedBatch build_batch(std::span<const LabeledDocument> source, std::span<const Document> target,
                       std::size_t n_pairs, PoolSampler& source_sampler,
                       PoolSampler& target_sampler, const Augmenter& source_augmenter,
                       const Augmenter& target_augmenter, Rng& rng) {
  if (source.empty() || target.empty()) {
    throw PreconditionError("build_batch needs nonempty source and target pools");
  }
  if (n_pairs == 0) throw PreconditionError("build_batch needs N >= 1");

  MixedBatch batch;
  batch.source_domain = source.front().base.domain;
  batch.target_domain = target.front().domain;
  for (auto i : source_sampler.next(n_pairs)) {
    batch.source.push_back(make_pair(source[i].base, source[i].label, source_augmenter, rng));
  }
  for (auto i : target_sampler.next(n_pairs)) {
    batch.target.push_back(make_pair(target[i], std::nullopt, target_augmenter, rng));
  }
  if (source.size() < n_pairs) {
    batch.warnings.push_back("source pool of " + std::to_string(source.size()) +
                             " documents is smaller than N=" + std::to_string(n_pairs) +
                             "; sampled with replacement");
  }
  if (target.size() < n_pairs) {
    batch.warnings.push_back("target pool of " + std::to_string(target.size()) +
                             " documents is smaller than N=" + std::to_string(n_pairs) +
                             "; sampled with replacement");
  }
  return batch;
}

LossWithGrad contrastive_term(const Matrix& z, std::size_t n_pairs, ContrastiveMode mode,
                              const std::string& source_domain, const std::string& target_domain,
                              Temperature tau) {
  const Index half = static_cast<Index>(2 * n_pairs);
  if (z.rows() != 2 * half) throw PreconditionError("contrastive_term: expected 4N rows");
  if (mode == ContrastiveMode::pooled) {
    std::vector<std::string> tags(n_pairs, source_domain);
    tags.insert(tags.end(), n_pairs, target_domain);
    return contrastive_loss_with_grad(ProjectionBatch(z, std::move(tags)), tau);
  }
  ProjectionBatch source(z.topRows(half), std::vector<std::string>(n_pairs, source_domain));
  ProjectionBatch target(z.bottomRows(half), std::vector<std::string>(n_pairs, target_domain));
  auto loss = in_domain_contrastive_loss_with_grad(source, target, tau);
  Matrix grad(z.rows(), z.cols());
  grad.topRows(half) = loss.grad_source;
  grad.bottomRows(half) = loss.grad_target;
  return {loss.value, std::move(grad)};
}

Trainer::Trainer(TrainConfig config, Model& model)
    : config_(std::move(config)),
      model_(model),
      optimizer_(model.parameters(), AdamW::Options{0.9, 0.999, 1e-8, config_.weight_decay}) {
  config_.validate();
}

LossReport Trainer::train_step(const MixedBatch& batch, TrainState& state) {
  if (state.epoch < 1) throw PreconditionError("train_step: epoch must be >= 1");
  const std::size_t n = batch.source.size();
  if (n == 0 || batch.target.size() != n) {
    throw PreconditionError("train_step: batch needs N pairs per domain");
  }
  const Index rows = static_cast<Index>(4 * n);
  const Index half = static_cast<Index>(2 * n);

  std::vector<std::string> texts;
  texts.reserve(static_cast<std::size_t>(rows));
  for (const auto* side : {&batch.source, &batch.target}) {
    for (const auto& pair : *side) {
      texts.push_back(pair.original.text);
      texts.push_back(pair.positive.text);
    }
  }

  model_.zero_grad();
  const Matrix hidden = model_.encoder().forward(texts);
  Mlp::Trace head_trace, cls_trace;
  const Matrix z = model_.head().forward(hidden, &head_trace);
  const Matrix logits = model_.classifier().forward(hidden, &cls_trace);

  auto diverged = [&](const std::string& what) {
    std::ostringstream msg;
    msg << what << " at step " << state.global_step << "; batch ids:";
    for (const auto& id : batch.ids()) msg << ' ' << id;
    return NonFiniteLossError(msg.str());
  };
  if (!z.allFinite() || !logits.allFinite()) throw diverged("non-finite activations");

  // Cross-entropy over labeled source originals (and optionally their views).
  std::vector<Index> ce_rows;
  std::vector<int> ce_labels;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& label = batch.source[k].label;
    if (!label) continue;
    ce_rows.push_back(static_cast<Index>(2 * k));
    ce_labels.push_back(class_index(*label));
    if (config_.ce_include_positives) {
      ce_rows.push_back(static_cast<Index>(2 * k + 1));
      ce_labels.push_back(class_index(*label));
    }
  }
  Matrix dlogits = Matrix::Zero(rows, 2);
  LossReport report;
  if (!ce_rows.empty()) {
    Matrix ce_logits(static_cast<Index>(ce_rows.size()), 2);
    for (std::size_t r = 0; r < ce_rows.size(); ++r) ce_logits.row(static_cast<Index>(r)) = logits.row(ce_rows[r]);
    auto ce = cross_entropy_with_grad(ce_logits, ce_labels);
    report.ce = ce.value;
    for (std::size_t r = 0; r < ce_rows.size(); ++r) {
      dlogits.row(ce_rows[r]) += config_.weights.ce * ce.grad.row(static_cast<Index>(r));
    }
  }

  auto con = contrastive_term(z, n, config_.strategy.contrastive_mode, batch.source_domain,
                              batch.target_domain, Temperature(config_.tau));
  report.con = con.value;

  // Every target row is unlabeled.
  auto ent = prediction_entropy_with_grad(logits.bottomRows(half));
  report.ent = ent.value;
  report.entropy_active =
      config_.strategy.entropy_enabled && state.epoch >= config_.strategy.entropy_start_epoch;
  if (report.entropy_active) {
    report.entropy_contribution = config_.weights.ent * ent.value;
    dlogits.bottomRows(half) += config_.weights.ent * ent.grad;
  }

  report.total = joint_loss(report.ce, report.con, report.ent, config_.weights, report.entropy_active);
  if (!std::isfinite(report.total)) {
    std::ostringstream what;
    what << "non-finite loss (ce=" << report.ce << ", con=" << report.con << ", ent=" << report.ent << ")";
    throw diverged(what.str());
  }

  Matrix dhidden = model_.classifier().backward(cls_trace, dlogits);
  if (config_.weights.con > 0.0) {
    dhidden += model_.head().backward(head_trace, config_.weights.con * con.grad);
  }
  model_.encoder().backward(dhidden);

  auto params = model_.parameters();
  report.grad_norm = clip_grad_norm(params, config_.grad_clip);
  report.lr = lr_at(state.global_step, state.total_steps, config_);
  optimizer_.step(report.lr);

  state.lr_current = report.lr;
  ++state.global_step;
  state.ce_history.push_back(report.ce);
  state.con_history.push_back(report.con);
  state.ent_history.push_back(report.entropy_contribution);
  return report;
}

std::vector<LabeledDocument> source_training_pool(const RunConfig& config,
                                                  const DomainCorpus& source) {
  if (config.source_labeled_per_class > 0) {
    return balanced_labeled_sample(source, config.source_labeled_per_class, config.train.seed);
  }
  return source.labeled;
}

std::optional<ShiftMeasure> run_shift(const RunConfig& config,
                                      std::span<const LabeledDocument> source_pool,
                                      const DomainCorpus& target) {
  if (source_pool.empty()) return std::nullopt;
  const auto source_dist = label_distribution(source_pool);
  if (source_dist.n_pos == 0 || source_dist.n_neg == 0) return std::nullopt;
  if (config.target_ratio > 0.0) return measure_shift(*source_dist.ratio(), config.target_ratio);
  if (target.labeled.empty()) return std::nullopt;
  const auto target_dist = label_distribution(target.labeled);
  if (target_dist.n_pos == 0 || target_dist.n_neg == 0) return std::nullopt;
  return measure_shift(source_dist, target_dist);
}

void resolve_run_strategy(RunConfig& config, const std::optional<ShiftMeasure>& shift) {
  const int start_epoch = config.train.strategy.entropy_start_epoch;
  config.train.strategy = resolve_strategy(config.strategy_choice, shift, config.strategy_threshold,
                                           config.allow_ablation);
  config.train.strategy.entropy_start_epoch = start_epoch;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

/// Keeps metrics lines up to and including `last_epoch`.
void truncate_metrics(const std::filesystem::path& path, int last_epoch) {
  std::vector<std::string> kept;
  {
    std::ifstream in(path);
    std::string line;
    while (in && std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.value("epoch", 0) <= last_epoch) kept.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& line : kept) out << line << '\n';
}

}  // namespace

TrainOutcome train(RunConfig config, const TrainInputs& inputs,
                   const std::optional<std::filesystem::path>& resume_from) {
  if (inputs.source == nullptr || inputs.target == nullptr) {
    throw PreconditionError("train needs source and target corpora");
  }
  if (config.encoder != "toy") {
    throw ValidationError("encoder '" + config.encoder +
                          "' is not available in this build; use the toy encoder");
  }
  const DomainCorpus& source = *inputs.source;
  const DomainCorpus& target = *inputs.target;

  const auto source_pool = source_training_pool(config, source);
  const std::span<const Document> target_pool(target.unlabeled);
  if (source_pool.empty()) throw PreconditionError("source corpus has no labeled documents");
  if (target_pool.empty()) throw PreconditionError("target corpus has no unlabeled documents");

  TrainOutcome outcome;
  outcome.shift = run_shift(config, source_pool, target);
  resolve_run_strategy(config, outcome.shift);
  outcome.strategy = config.train.strategy;
  config.train.validate();
  outcome.config_hash = config_hash(config);
  const std::string snapshot = config_snapshot(config);

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir / "checkpoints");
  write_text(out_dir / "config.snapshot", snapshot);

  const std::size_t n = static_cast<std::size_t>(config.train.batch_pairs);
  const std::size_t larger = std::max(source_pool.size(), target_pool.size());
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>((larger + n - 1) / n);

  Model model = make_toy_model(config.model, config.train.seed);
  Trainer trainer(config.train, model);
  TrainState state;
  state.total_steps = steps_per_epoch * config.train.epochs;

  outcome.metrics_log = out_dir / "metrics.jsonl";
  if (resume_from) {
    const auto manifest = read_manifest(*resume_from / "manifest.json");
    if (manifest.config_hash != outcome.config_hash) {
      throw ManifestMismatchError("checkpoint " + resume_from->string() + " has config hash " +
                                  manifest.config_hash + ", current config hashes to " +
                                  outcome.config_hash);
    }
    restore_parameters(read_blob(*resume_from / "encoder.bin"), model.encoder().parameters());
    restore_parameters(read_blob(*resume_from / "head.bin"), model.head().parameters());
    restore_parameters(read_blob(*resume_from / "classifier.bin"), model.classifier().parameters());
    trainer.optimizer().import_state(read_blob(*resume_from / "optimizer.bin"));
    state.epoch = manifest.epoch + 1;
    state.global_step = manifest.global_step;
    truncate_metrics(outcome.metrics_log, manifest.epoch);
  } else {
    std::ofstream(outcome.metrics_log, std::ios::trunc);
  }
  std::ofstream metrics(outcome.metrics_log, std::ios::app);
  if (!metrics) throw IoError("cannot write " + outcome.metrics_log.string());

  AugmentationConfig aug_config = config.augment;
  aug_config.seed = config.train.seed;
  const Augmenter source_aug(aug_config, inputs.synonyms, inputs.source_cache);
  const Augmenter target_aug(aug_config, inputs.synonyms, inputs.target_cache);

  CheckpointManifest manifest;
  manifest.encoder_id = model.encoder().id();
  manifest.buckets = config.model.buckets;
  manifest.hidden_dim = config.model.hidden_dim;
  manifest.projection_dim = config.model.projection_dim;
  manifest.config_hash = outcome.config_hash;
  manifest.source_domain = source.domain;
  manifest.target_domain = target.domain;
  manifest.strategy = config.train.strategy;

  const std::uint64_t seed = config.train.seed;
  for (int epoch = state.epoch; epoch <= config.train.epochs; ++epoch) {
    state.epoch = epoch;
    const auto e = static_cast<std::uint64_t>(epoch);
    PoolSampler source_sampler(source_pool.size(), make_rng({seed, 101, e}));
    PoolSampler target_sampler(target_pool.size(), make_rng({seed, 102, e}));
    Rng aug_rng = make_rng({seed, 103, e});

    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      const auto batch = build_batch(source_pool, target_pool, n, source_sampler, target_sampler,
                                     source_aug, target_aug, aug_rng);
      if (s == 0 && outcome.warnings.empty()) {
        for (const auto& w : batch.warnings) outcome.warnings.push_back(w);
      }
      const auto report = trainer.train_step(batch, state);
      nlohmann::json line = {{"step", state.global_step},
                             {"epoch", epoch},
                             {"lr", report.lr},
                             {"ce", report.ce},
                             {"con", report.con},
                             {"ent", report.entropy_contribution},
                             {"ent_raw", report.ent},
                             {"total", report.total}};
      metrics << line.dump() << '\n';
    }
    metrics.flush();

    manifest.epoch = epoch;
    manifest.global_step = state.global_step;
    save_checkpoint(out_dir / "checkpoints" / ("epoch-" + std::to_string(epoch)), model,
                    &trainer.optimizer(), manifest, snapshot);
  }

  outcome.final_checkpoint = out_dir / "checkpoints" / "final";
  manifest.epoch = config.train.epochs;
  manifest.global_step = state.global_step;
  save_checkpoint(outcome.final_checkpoint, model, &trainer.optimizer(), manifest, snapshot);
  outcome.state = std::move(state);
  return outcome;
}

}  // namespace domcl
