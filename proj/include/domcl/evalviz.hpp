// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Target-domain accuracy and 2-D exports of hidden features.

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "domcl/corpus.hpp"
#include "domcl/model.hpp"

namespace domcl {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_total = 0;
  ClassMetrics negative;
  ClassMetrics positive;
  std::string config_hash;
  std::vector<std::string> warnings;
};

/// Predicted class per row: argmax of the two logits, ties go to class 0
/// (negative).
std::vector<Label> predict_labels(const Matrix& logits);

/// Accuracy of the model's argmax predictions. Deterministic: no
/// augmentation, inference-mode encoder. Throws on an empty test set.
EvalReport evaluate(const Model& model, std::span<const LabeledDocument> test_set,
                    const std::string& config_hash = {}, std::size_t batch_size = 256);

/// Same from precomputed logits, for callers that own the forward pass.
EvalReport evaluate_logits(const Matrix& logits, std::span<const LabeledDocument> test_set);

void write_eval_report(const std::filesystem::path& path, const EvalReport& report);

/// Hidden features H (not projections) for a list of documents.
Matrix hidden_features(const Model& model, std::span<const Document> docs,
                       std::size_t batch_size = 256);

/// Maps an (n, d) feature matrix to (n, 2).
class Reducer {
 public:
  virtual ~Reducer() = default;
  virtual Matrix reduce(const Matrix& features) = 0;
  virtual std::string id() const = 0;
  virtual std::map<std::string, std::string> parameters() const { return {}; }
};

/// Projection onto the two leading principal components. Signs are fixed
/// so the largest-magnitude loading of each component is positive.
class PcaReducer : public Reducer {
 public:
  Matrix reduce(const Matrix& features) override;
  std::string id() const override { return "pca"; }
};

/// Runs an external program as `<command> <input.csv> <output.csv> <seed>`. The
/// input has one row of d comma-separated features per document; the
/// program must write one `x,y` row per input row. Use it to plug in t-SNE.
class CommandReducer : public Reducer {
 public:
  CommandReducer(std::string command, std::uint64_t seed);
  Matrix reduce(const Matrix& features) override;
  std::string id() const override { return "command"; }
  std::map<std::string, std::string> parameters() const override;

 private:
  std::string command_;
  std::uint64_t seed_;
};

enum class DomainRole { source, target };

struct ProjectionRow {
  double x = 0.0;
  double y = 0.0;
  DomainRole domain = DomainRole::source;
  Label label = Label::negative;
};

struct ProjectionExport {
  std::vector<ProjectionRow> rows;
  std::string reducer_id;
  std::map<std::string, std::string> reducer_parameters;
};

/// Reduces hidden features of source then target documents to 2-D and tags
/// each row with its (domain, label) group. Reducer failures are rethrown
/// with the reducer id and parameters.
ProjectionExport export_projection(const Model& model, std::span<const LabeledDocument> source,
                                   std::span<const LabeledDocument> target, Reducer& reducer);

/// CSV with header `x,y,domain,label`.
void write_projection_csv(const std::filesystem::path& path, const ProjectionExport& projection);

/// Scatter plot: source positive red, source negative yellow, target
/// positive blue, target negative green.
void write_projection_svg(const std::filesystem::path& path, const ProjectionExport& projection);

std::string_view group_color(DomainRole domain, Label label);

}  // namespace domcl
