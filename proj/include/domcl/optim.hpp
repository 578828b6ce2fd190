// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "domcl/model.hpp"

namespace domcl {

/// Adam with decoupled weight decay. Parameters flagged `decay = false`
/// (biases) are not decayed.
class AdamW {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW(std::vector<Parameter*> params, Options options);

  void step(double lr);
  std::int64_t steps_taken() const { return t_; }

  /// Moment buffers as named parameters (`<name>.m`, `<name>.v`) plus a 1x1
  /// `adamw.step`, for checkpointing.
  std::vector<Parameter> export_state() const;
  void import_state(const std::vector<Parameter>& state);

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  Options options_;
  std::int64_t t_ = 0;
};

/// Global L2 norm of all gradients.
double global_grad_norm(std::span<Parameter* const> params);

/// Rescales gradients so their global norm is at most max_norm. Returns the
/// norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace domcl
