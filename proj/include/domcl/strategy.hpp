// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Choosing between pooled contrastive learning with entropy minimization and
// in-domain contrastive learning, from the size of the label-distribution
// shift between the labeled source pool and the unlabeled target pool.
//
// Small shift: entropy minimization sharpens the target clusters and the
// pooled loss uses all in-batch negatives. Large shift: entropy
// minimization drifts towards the dominant target class, while in-domain
// contrast keeps the two domains from being pushed apart.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "domcl/corpus.hpp"

namespace domcl {

enum class ContrastiveMode { pooled, in_domain };

std::string_view to_string(ContrastiveMode mode);

struct ShiftMeasure {
  double source_ratio = 1.0;
  double target_ratio = 1.0;
  double shift = 1.0;  // max(r, 1/r) with r = target_ratio / source_ratio
};

ShiftMeasure measure_shift(double source_ratio, double target_ratio);
/// Both distributions need n_neg > 0 and n_pos > 0.
ShiftMeasure measure_shift(const LabelDistribution& source, const LabelDistribution& target);

struct StrategyConfig {
  static constexpr double kDefaultThreshold = 5.0;

  ContrastiveMode contrastive_mode = ContrastiveMode::pooled;
  bool entropy_enabled = true;
  int entropy_start_epoch = 2;
  double threshold_used = kDefaultThreshold;
  /// Set for manual overrides that enable both or neither technique.
  bool ablation = false;

  /// Enforces the one-of-two rule unless `ablation` is set.
  void validate() const;
};

/// shift <= threshold: pooled + entropy; shift > threshold: in-domain only.
StrategyConfig select_strategy(const ShiftMeasure& shift,
                               double threshold = StrategyConfig::kDefaultThreshold);

/// Command-line spelling of a strategy choice.
enum class StrategyChoice { automatic, pooled_entropy, in_domain, both, neither };

std::optional<StrategyChoice> parse_strategy_choice(std::string_view text);
std::string_view to_string(StrategyChoice choice);

/// Resolves a manual choice. `both` and `neither` need `allow_ablation`;
/// `automatic` needs a shift.
StrategyConfig resolve_strategy(StrategyChoice choice, const std::optional<ShiftMeasure>& shift,
                                double threshold, bool allow_ablation);

}  // namespace domcl
