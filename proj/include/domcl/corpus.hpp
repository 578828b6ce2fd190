// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Dataset records, balanced labeled sampling and label statistics.
//
// Corpora are stored one JSON object per line with keys `text`, `domain`,
// optional `label` ("positive"/"negative") and optional `id`.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace domcl {

/// Class index 0 is negative, 1 is positive. Logit columns follow this order.
enum class Label : int { negative = 0, positive = 1 };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);
inline int class_index(Label label) { return static_cast<int>(label); }

struct Document {
  std::string id;
  std::string text;
  std::string domain;
};

struct LabeledDocument {
  Document base;
  Label label = Label::negative;
};

struct DomainCorpus {
  std::string domain;
  std::vector<LabeledDocument> labeled;
  std::vector<Document> unlabeled;

  std::size_t size() const { return labeled.size() + unlabeled.size(); }

  /// Throws ValidationError on a foreign domain tag, empty text or a
  /// duplicated id (which also covers labeled/unlabeled overlap).
  void validate() const;
};

struct LabelDistribution {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;

  std::size_t total() const { return n_pos + n_neg; }
  /// n_pos / n_neg; empty when there are no negatives.
  std::optional<double> ratio() const;
};

/// Parses the line-delimited corpus format. `source` names the stream in
/// error messages. Records without an id get `<domain>-<line>`.
DomainCorpus parse_corpus(std::istream& in, std::string_view domain,
                          const std::string& source = "<stream>");

DomainCorpus load_corpus(const std::filesystem::path& path, std::string_view domain);

/// Inverse of load_corpus: labeled records first, then unlabeled.
void write_corpus(const std::filesystem::path& path, const DomainCorpus& corpus);

/// Draws exactly n_per_class positives and negatives uniformly without
/// replacement. The result is shuffled and depends only on (corpus, n, seed).
std::vector<LabeledDocument> balanced_labeled_sample(const DomainCorpus& corpus,
                                                     std::size_t n_per_class, std::uint64_t seed);

LabelDistribution label_distribution(std::span<const LabeledDocument> docs);

/// Published statistics of the standard cross-domain sentiment benchmarks:
/// 2000 balanced labeled reviews per domain, plus an unlabeled pool whose
/// pos:neg ratio varies.
struct BenchmarkDomain {
  std::string_view name;
  std::size_t labeled;
  std::size_t unlabeled;
  double unlabeled_pos_neg_ratio;
};

std::span<const BenchmarkDomain> benchmark_domains();
std::optional<BenchmarkDomain> find_benchmark_domain(std::string_view name);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace domcl
