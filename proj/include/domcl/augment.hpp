// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Positive-view generation for contrastive pairs.
//
// Two methods are supported: online random synonym substitution against an
// external lexicon, and back-translation through a pivot language that is
// computed once and cached on disk.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "domcl/corpus.hpp"
#include "domcl/random.hpp"

namespace domcl {

enum class AugmentMethod { synonym_substitution, back_translation };

std::string_view to_string(AugmentMethod method);
std::optional<AugmentMethod> parse_augment_method(std::string_view text);

struct AugmentationConfig {
  AugmentMethod method = AugmentMethod::back_translation;
  double substitution_rate = 0.3;
  std::string pivot_language = "de";
  int beam = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

class SynonymProvider {
 public:
  virtual ~SynonymProvider() = default;
  /// Single-token synonyms of a lower-cased word, never the word itself.
  virtual std::vector<std::string> lookup(std::string_view word) const = 0;
  virtual std::string id() const = 0;
};

/// In-memory lexicon. Multi-word entries and self-references are dropped on
/// insertion, and synonyms keep their insertion order.
class LexiconSynonymProvider : public SynonymProvider {
 public:
  explicit LexiconSynonymProvider(std::string id = "lexicon");

  void add(std::string_view word, const std::vector<std::string>& synonyms);
  std::vector<std::string> lookup(std::string_view word) const override;
  std::string id() const override { return id_; }
  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<std::string, std::vector<std::string>>& entries() const { return entries_; }

  /// Reads `word<TAB>syn1 syn2 ...` lines; `#` starts a comment line.
  static LexiconSynonymProvider load(const std::filesystem::path& path);

 private:
  std::string id_;
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;
  virtual std::string translate(const std::string& text, std::string_view source_language,
                                std::string_view target_language, int beam) = 0;
  virtual std::string id() const = 0;
};

/// Returns its input unchanged. Stands in for a real MT system in tests and
/// dry runs.
class IdentityTranslationProvider : public TranslationProvider {
 public:
  std::string translate(const std::string& text, std::string_view, std::string_view,
                        int) override {
    return text;
  }
  std::string id() const override { return "identity"; }
};

/// Whitespace token split into punctuation prefix, core word and suffix.
struct Token {
  std::size_t begin = 0;  // offset of the core word in the source text
  std::size_t length = 0;
  std::string core;
};

/// Splits on whitespace and strips leading/trailing ASCII punctuation. Tokens
/// that are pure punctuation have an empty core and are never substituted.
std::vector<Token> tokenize_for_substitution(std::string_view text);

/// Applies the casing pattern of `original` (all caps, capitalised, lower)
/// to `replacement`.
std::string match_case(std::string_view original, std::string_view replacement);

struct SubstitutionResult {
  Document document;
  std::size_t eligible = 0;
  std::size_t substituted = 0;
};

/// Each token with at least one synonym is replaced independently with
/// probability `substitution_rate` by a uniformly chosen synonym. There is no
/// cap on the number of replacements.
SubstitutionResult substitute_synonyms(const Document& doc, const SynonymProvider& provider,
                                       const AugmentationConfig& config, Rng& rng);

Document synonym_substitute(const Document& doc, const SynonymProvider& provider,
                            const AugmentationConfig& config, Rng& rng);

/// Identity and parameters of a back-translation cache.
struct CacheManifest {
  std::string provider_id;
  std::string pivot_language;
  int beam = 1;
  std::string created;

  bool compatible_with(const CacheManifest& other) const;
};

class BackTranslationCache {
 public:
  BackTranslationCache() = default;
  explicit BackTranslationCache(CacheManifest manifest) : manifest_(std::move(manifest)) {}

  const CacheManifest& manifest() const { return manifest_; }
  bool has_manifest() const { return !manifest_.provider_id.empty(); }
  void set_manifest(CacheManifest manifest) { manifest_ = std::move(manifest); }

  const std::string* find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }
  void insert(const std::string& id, std::string text);
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Directory layout: manifest.json plus entries.jsonl ({"id","text"} lines).
  void save(const std::filesystem::path& dir) const;
  static BackTranslationCache load(const std::filesystem::path& dir);
  static bool exists(const std::filesystem::path& dir);

 private:
  CacheManifest manifest_;
  std::map<std::string, std::string> entries_;
};

struct BackTranslationReport {
  std::size_t provider_calls = 0;
  std::size_t reused = 0;
  std::vector<std::string> failed_ids;
  std::vector<std::string> failure_messages;
};

/// Fills `cache` with a back-translation of every labeled and unlabeled
/// document, skipping ids already present. A provider exception on one
/// document is recorded in the report and the run continues. Throws
/// ManifestMismatchError if `cache` was built with different settings.
/// `on_entry`, when set, observes each new entry as it is produced.
BackTranslationReport back_translate_offline(
    const DomainCorpus& corpus, TranslationProvider& provider, const AugmentationConfig& config,
    BackTranslationCache& cache,
    const std::function<void(const std::string&, const std::string&)>& on_entry = {});

/// Same as above against an on-disk cache directory; new entries are
/// appended to entries.jsonl as they are produced so an interrupted run can
/// resume.
BackTranslationReport back_translate_to_directory(const DomainCorpus& corpus,
                                                  TranslationProvider& provider,
                                                  const AugmentationConfig& config,
                                                  const std::filesystem::path& dir);

/// Produces the positive view x_j of a document by the configured method.
class Augmenter {
 public:
  Augmenter(AugmentationConfig config, const SynonymProvider* synonyms,
            const BackTranslationCache* cache);

  const AugmentationConfig& config() const { return config_; }

  /// Throws CacheMissError under back-translation when the id is not cached.
  Document make_positive(const Document& doc, Rng& rng) const;

 private:
  AugmentationConfig config_;
  const SynonymProvider* synonyms_;
  const BackTranslationCache* cache_;
};

}  // namespace domcl
