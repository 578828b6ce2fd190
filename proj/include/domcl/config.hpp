// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration and its flat `namespace.key = value` text form.
//
// The snapshot written next to every run lists every key in a fixed order,
// so two snapshots of the same configuration are byte-identical and the
// configuration hash is stable.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "domcl/augment.hpp"
#include "domcl/losses.hpp"
#include "domcl/model.hpp"
#include "domcl/strategy.hpp"

namespace domcl {

struct TrainConfig {
  int epochs = 4;
  int batch_pairs = 16;  // N pairs per domain per step
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  double warmup_fraction = 0.1;
  double tau = Temperature::kDefault;
  double grad_clip = 1.0;  // global L2 norm; <= 0 disables clipping
  std::uint64_t seed = 0;
  /// Also feed the augmented source views to the cross-entropy term.
  bool ce_include_positives = false;
  StrategyConfig strategy;
  LossWeights weights;

  void validate() const;
};

struct RunConfig {
  std::string source_path;
  std::string target_path;
  std::string source_domain;
  std::string target_domain;
  /// Balanced labeled source sample size per class; 0 keeps every labeled record.
  std::size_t source_labeled_per_class = 0;
  /// Target pos:neg estimate for strategy selection; 0 derives it from
  /// labeled target records.
  double target_ratio = 0.0;

  TrainConfig train;
  AugmentationConfig augment;
  std::string synonyms_path;
  std::string cache_dir;

  StrategyChoice strategy_choice = StrategyChoice::automatic;
  double strategy_threshold = StrategyConfig::kDefaultThreshold;
  bool allow_ablation = false;

  std::string encoder = "toy";
  ModelDims model;

  std::string out_dir = "run";
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Throws ParseError.
KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>");
KeyValues load_key_values(const std::filesystem::path& path);

/// Applies known keys onto `config`; an unknown key is a ValidationError.
void apply_key_values(RunConfig& config, const KeyValues& values);

/// Canonical snapshot text, including the resolved strategy.
std::string config_snapshot(const RunConfig& config);

/// 16 hex digits of FNV-1a over the snapshot without `run.*` keys.
std::string config_hash(const RunConfig& config);

}  // namespace domcl
