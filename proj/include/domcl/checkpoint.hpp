// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint directories: one parameter blob per component plus manifest.json.
//
//   <dir>/manifest.json     dims, encoder id, epoch, step, config hash, strategy
//   <dir>/encoder.bin       named matrices, see write_blob()
//   <dir>/head.bin
//   <dir>/classifier.bin
//   <dir>/optimizer.bin     AdamW moments (optional)
//   <dir>/config.snapshot   run configuration text

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domcl/model.hpp"
#include "domcl/optim.hpp"
#include "domcl/strategy.hpp"

namespace domcl {

/// Blob layout (little-endian): "DOMCLBLB", u64 count, then per matrix
/// u32 name length, name bytes, i64 rows, i64 cols, rows*cols f64 in
/// column-major order.
void write_blob(const std::filesystem::path& path, std::span<const Parameter* const> params);
std::vector<Parameter> read_blob(const std::filesystem::path& path);

/// Copies blob values into `params` by name; shapes must match exactly.
void restore_parameters(const std::vector<Parameter>& stored, std::span<Parameter* const> params);

struct CheckpointManifest {
  std::string encoder_id;
  std::uint32_t buckets = 0;
  Index hidden_dim = 0;
  Index projection_dim = 0;
  int epoch = 0;
  std::int64_t global_step = 0;
  std::string config_hash;
  std::string source_domain;
  std::string target_domain;
  StrategyConfig strategy;
};

void write_manifest(const std::filesystem::path& path, const CheckpointManifest& manifest);
CheckpointManifest read_manifest(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& dir, Model& model, const AdamW* optimizer,
                     const CheckpointManifest& manifest, const std::string& config_snapshot);

struct LoadedCheckpoint {
  CheckpointManifest manifest;
  Model model;
};

/// Rebuilds a toy-encoder model from a checkpoint directory.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace domcl
