// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "domcl/error.hpp"

namespace domcl {

namespace {

constexpr char kMagic[8] = {'D', 'O', 'M', 'C', 'L', 'B', 'L', 'B'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError("truncated blob " + path.string());
  }
  return value;
}

}  // namespace

void write_blob(const std::filesystem::path& path, std::span<const Parameter* const> params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, params.size());
  for (const auto* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::int64_t>(out, p->value.rows());
    put<std::int64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<Parameter> read_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path.string() + " is not a parameter blob");
  }
  const auto count = get<std::uint64_t>(in, path);
  std::vector<Parameter> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw IoError("truncated blob " + path.string());
    const auto rows = get<std::int64_t>(in, path);
    const auto cols = get<std::int64_t>(in, path);
    if (rows < 0 || cols < 0) throw IoError("bad matrix shape in " + path.string());
    Matrix value(rows, cols);
    if (!in.read(reinterpret_cast<char*>(value.data()),
                 static_cast<std::streamsize>(value.size() * sizeof(double)))) {
      throw IoError("truncated blob " + path.string());
    }
    out.push_back({std::move(name), std::move(value), Matrix(), false});
  }
  return out;
}

void restore_parameters(const std::vector<Parameter>& stored, std::span<Parameter* const> params) {
  for (auto* p : params) {
    bool found = false;
    for (const auto& s : stored) {
      if (s.name != p->name) continue;
      if (s.value.rows() != p->value.rows() || s.value.cols() != p->value.cols()) {
        throw ValidationError("checkpoint shape mismatch for '" + p->name + "'");
      }
      p->value = s.value;
      found = true;
      break;
    }
    if (!found) throw ValidationError("checkpoint has no parameter '" + p->name + "'");
  }
}

void write_manifest(const std::filesystem::path& path, const CheckpointManifest& m) {
  nlohmann::json j = {
      {"format", 1},
      {"encoder_id", m.encoder_id},
      {"buckets", m.buckets},
      {"hidden_dim", m.hidden_dim},
      {"projection_dim", m.projection_dim},
      {"epoch", m.epoch},
      {"global_step", m.global_step},
      {"config_hash", m.config_hash},
      {"source_domain", m.source_domain},
      {"target_domain", m.target_domain},
      {"strategy",
       {{"contrastive_mode", std::string(to_string(m.strategy.contrastive_mode))},
        {"entropy_enabled", m.strategy.entropy_enabled},
        {"entropy_start_epoch", m.strategy.entropy_start_epoch},
        {"threshold", m.strategy.threshold_used},
        {"ablation", m.strategy.ablation}}},
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CheckpointManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint manifest " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    CheckpointManifest m;
    m.encoder_id = j.at("encoder_id").get<std::string>();
    m.buckets = j.at("buckets").get<std::uint32_t>();
    m.hidden_dim = j.at("hidden_dim").get<Index>();
    m.projection_dim = j.at("projection_dim").get<Index>();
    m.epoch = j.at("epoch").get<int>();
    m.global_step = j.at("global_step").get<std::int64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.source_domain = j.value("source_domain", "");
    m.target_domain = j.value("target_domain", "");
    const auto& s = j.at("strategy");
    m.strategy.contrastive_mode = s.at("contrastive_mode").get<std::string>() == "in_domain"
                                      ? ContrastiveMode::in_domain
                                      : ContrastiveMode::pooled;
    m.strategy.entropy_enabled = s.at("entropy_enabled").get<bool>();
    m.strategy.entropy_start_epoch = s.at("entropy_start_epoch").get<int>();
    m.strategy.threshold_used = s.at("threshold").get<double>();
    m.strategy.ablation = s.value("ablation", false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

void save_checkpoint(const std::filesystem::path& dir, Model& model, const AdamW* optimizer,
                     const CheckpointManifest& manifest, const std::string& config_snapshot) {
  std::filesystem::create_directories(dir);
  auto as_const = [](std::vector<Parameter*> ps) {
    return std::vector<const Parameter*>(ps.begin(), ps.end());
  };
  write_blob(dir / "encoder.bin", as_const(model.encoder().parameters()));
  write_blob(dir / "head.bin", as_const(model.head().parameters()));
  write_blob(dir / "classifier.bin", as_const(model.classifier().parameters()));
  if (optimizer != nullptr) {
    const auto state = optimizer->export_state();
    std::vector<const Parameter*> ptrs;
    for (const auto& s : state) ptrs.push_back(&s);
    write_blob(dir / "optimizer.bin", ptrs);
  }
  {
    std::ofstream out(dir / "config.snapshot");
    if (!out) throw IoError("cannot write " + (dir / "config.snapshot").string());
    out << config_snapshot;
  }
  // Manifest last: its presence marks a complete checkpoint.
  write_manifest(dir / "manifest.json", manifest);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  auto manifest = read_manifest(dir / "manifest.json");
  if (manifest.encoder_id.rfind("toy-hash-bag", 0) != 0) {
    throw ValidationError("checkpoint encoder '" + manifest.encoder_id +
                          "' is not available in this build");
  }
  ModelDims dims{manifest.buckets, manifest.hidden_dim, manifest.projection_dim};
  Model model = make_toy_model(dims, 0);
  restore_parameters(read_blob(dir / "encoder.bin"), model.encoder().parameters());
  restore_parameters(read_blob(dir / "head.bin"), model.head().parameters());
  restore_parameters(read_blob(dir / "classifier.bin"), model.classifier().parameters());
  return {std::move(manifest), std::move(model)};
}

}  // namespace domcl
