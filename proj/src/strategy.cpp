// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "domcl/error.hpp"

namespace domcl {

std::string_view to_string(ContrastiveMode mode) {
  return mode == ContrastiveMode::in_domain ? "in_domain" : "pooled";
}

ShiftMeasure measure_shift(double source_ratio, double target_ratio) {
  for (double r : {source_ratio, target_ratio}) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ValidationError("label ratio must be positive and finite, got " + std::to_string(r));
    }
  }
  const double r = target_ratio / source_ratio;
  return {source_ratio, target_ratio, std::max(r, 1.0 / r)};
}

ShiftMeasure measure_shift(const LabelDistribution& source, const LabelDistribution& target) {
  auto ratio = [](const LabelDistribution& d, const char* which) {
    if (d.n_pos == 0 || d.n_neg == 0) {
      throw ValidationError(std::string(which) + " label distribution is degenerate (" +
                            std::to_string(d.n_pos) + " pos / " + std::to_string(d.n_neg) +
                            " neg)");
    }
    return *d.ratio();
  };
  return measure_shift(ratio(source, "source"), ratio(target, "target"));
}

void StrategyConfig::validate() const {
  if (entropy_start_epoch < 1) throw ValidationError("entropy_start_epoch must be >= 1");
  const bool in_domain = contrastive_mode == ContrastiveMode::in_domain;
  if (!ablation && in_domain == entropy_enabled) {
    throw ValidationError(
        "strategy must use exactly one of in-domain contrast and entropy minimization; "
        "both/neither are ablation settings");
  }
}

StrategyConfig select_strategy(const ShiftMeasure& shift, double threshold) {
  if (!(threshold > 1.0)) throw ValidationError("strategy threshold must be > 1");
  StrategyConfig config;
  config.threshold_used = threshold;
  if (shift.shift > threshold) {
    config.contrastive_mode = ContrastiveMode::in_domain;
    config.entropy_enabled = false;
  } else {
    config.contrastive_mode = ContrastiveMode::pooled;
    config.entropy_enabled = true;
  }
  return config;
}

std::optional<StrategyChoice> parse_strategy_choice(std::string_view text) {
  if (text == "auto") return StrategyChoice::automatic;
  if (text == "pooled-entropy") return StrategyChoice::pooled_entropy;
  if (text == "in-domain") return StrategyChoice::in_domain;
  if (text == "both") return StrategyChoice::both;
  if (text == "neither") return StrategyChoice::neither;
  return std::nullopt;
}

std::string_view to_string(StrategyChoice choice) {
  switch (choice) {
    case StrategyChoice::automatic: return "auto";
    case StrategyChoice::pooled_entropy: return "pooled-entropy";
    case StrategyChoice::in_domain: return "in-domain";
    case StrategyChoice::both: return "both";
    case StrategyChoice::neither: return "neither";
  }
  return "auto";
}

StrategyConfig resolve_strategy(StrategyChoice choice, const std::optional<ShiftMeasure>& shift,
                                double threshold, bool allow_ablation) {
  StrategyConfig config;
  config.threshold_used = threshold;
  switch (choice) {
    case StrategyChoice::automatic:
      if (!shift) throw ValidationError("automatic strategy needs a label-distribution shift");
      return select_strategy(*shift, threshold);
    case StrategyChoice::pooled_entropy:
      config.contrastive_mode = ContrastiveMode::pooled;
      config.entropy_enabled = true;
      return config;
    case StrategyChoice::in_domain:
      config.contrastive_mode = ContrastiveMode::in_domain;
      config.entropy_enabled = false;
      return config;
    case StrategyChoice::both:
    case StrategyChoice::neither:
      if (!allow_ablation) {
        throw ValidationError("strategy '" + std::string(to_string(choice)) +
                              "' is an ablation setting and needs --allow-ablation");
      }
      config.ablation = true;
      config.contrastive_mode =
          choice == StrategyChoice::both ? ContrastiveMode::in_domain : ContrastiveMode::pooled;
      config.entropy_enabled = choice == StrategyChoice::both;
      return config;
  }
  return config;
}

}  // namespace domcl
