// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/augment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "domcl/error.hpp"

namespace domcl {

namespace {

const std::string kPositiveSuffix = "~pos";

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(AugmentMethod method) {
  return method == AugmentMethod::back_translation ? "back_translation" : "synonym_substitution";
}

std::optional<AugmentMethod> parse_augment_method(std::string_view text) {
  if (text == "back_translation" || text == "bt") return AugmentMethod::back_translation;
  if (text == "synonym_substitution" || text == "ss") return AugmentMethod::synonym_substitution;
  return std::nullopt;
}

void AugmentationConfig::validate() const {
  if (!(substitution_rate >= 0.0 && substitution_rate <= 1.0)) {
    throw ValidationError("substitution_rate must lie in [0, 1], got " +
                          std::to_string(substitution_rate));
  }
  if (beam < 1) throw ValidationError("beam must be >= 1, got " + std::to_string(beam));
  if (method == AugmentMethod::back_translation && pivot_language.empty()) {
    throw ValidationError("back translation needs a pivot language");
  }
}

LexiconSynonymProvider::LexiconSynonymProvider(std::string id) : id_(std::move(id)) {}

void LexiconSynonymProvider::add(std::string_view word, const std::vector<std::string>& synonyms) {
  const std::string key = to_lower(word);
  auto& slot = entries_[key];
  for (const auto& syn : synonyms) {
    const std::string candidate = to_lower(trim(syn));
    if (candidate.empty() || candidate == key) continue;
    if (std::any_of(candidate.begin(), candidate.end(),
                    [](unsigned char c) { return std::isspace(c) || c == '_'; })) {
      continue;  // multi-word synonym
    }
    if (std::find(slot.begin(), slot.end(), candidate) == slot.end()) slot.push_back(candidate);
  }
  if (slot.empty()) entries_.erase(key);
}

std::vector<std::string> LexiconSynonymProvider::lookup(std::string_view word) const {
  auto it = entries_.find(to_lower(word));
  return it == entries_.end() ? std::vector<std::string>{} : it->second;
}

LexiconSynonymProvider LexiconSynonymProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synonym lexicon " + path.string());
  LexiconSynonymProvider provider("lexicon:" + path.filename().string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), line_no, "expected word<TAB>synonyms");
    std::istringstream rest(line.substr(tab + 1));
    std::vector<std::string> synonyms;
    for (std::string s; rest >> s;) synonyms.push_back(s);
    provider.add(trim(line.substr(0, tab)), synonyms);
  }
  return provider;
}

std::vector<Token> tokenize_for_substitution(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t end = i;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;

    std::size_t core_begin = i;
    std::size_t core_end = end;
    while (core_begin < core_end && is_punct(static_cast<unsigned char>(text[core_begin]))) ++core_begin;
    while (core_end > core_begin && is_punct(static_cast<unsigned char>(text[core_end - 1]))) --core_end;

    tokens.push_back({core_begin, core_end - core_begin,
                      std::string(text.substr(core_begin, core_end - core_begin))});
    i = end;
  }
  return tokens;
}

std::string match_case(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  auto is_upper = [](unsigned char c) { return std::isupper(c) != 0; };
  auto is_alpha = [](unsigned char c) { return std::isalpha(c) != 0; };
  const auto letters = std::count_if(original.begin(), original.end(), is_alpha);
  const auto uppers = std::count_if(original.begin(), original.end(), is_upper);
  if (letters > 1 && uppers == letters) {
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  } else if (!original.empty() && is_upper(original.front()) && !out.empty()) {
    out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
  }
  return out;
}

SubstitutionResult substitute_synonyms(const Document& doc, const SynonymProvider& provider,
                                       const AugmentationConfig& config, Rng& rng) {
  config.validate();
  SubstitutionResult result;
  result.document = {doc.id + kPositiveSuffix, std::string(), doc.domain};

  std::string& out = result.document.text;
  std::size_t copied = 0;
  for (const auto& token : tokenize_for_substitution(doc.text)) {
    if (token.core.empty()) continue;
    const auto synonyms = provider.lookup(to_lower(token.core));
    if (synonyms.empty()) continue;
    ++result.eligible;
    if (uniform01(rng) >= config.substitution_rate) continue;
    const auto& choice = synonyms[uniform_index(rng, synonyms.size())];
    out.append(doc.text, copied, token.begin - copied);
    out += match_case(token.core, choice);
    copied = token.begin + token.length;
    ++result.substituted;
  }
  out.append(doc.text, copied, std::string::npos);
  return result;
}

Document synonym_substitute(const Document& doc, const SynonymProvider& provider,
                            const AugmentationConfig& config, Rng& rng) {
  return substitute_synonyms(doc, provider, config, rng).document;
}

bool CacheManifest::compatible_with(const CacheManifest& other) const {
  return provider_id == other.provider_id && pivot_language == other.pivot_language &&
         beam == other.beam;
}

const std::string* BackTranslationCache::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

void BackTranslationCache::insert(const std::string& id, std::string text) {
  entries_[id] = std::move(text);
}

namespace {

nlohmann::json manifest_json(const CacheManifest& m) {
  return {{"provider_id", m.provider_id},
          {"pivot_language", m.pivot_language},
          {"beam", m.beam},
          {"created", m.created}};
}

void write_manifest(const std::filesystem::path& dir, const CacheManifest& m) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest_json(m).dump(2) << '\n';
}

std::string entry_line(const std::string& id, const std::string& text) {
  return nlohmann::json{{"id", id}, {"text", text}}.dump();
}

}  // namespace

bool BackTranslationCache::exists(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "manifest.json");
}

void BackTranslationCache::save(const std::filesystem::path& dir) const {
  write_manifest(dir, manifest_);
  std::ofstream out(dir / "entries.jsonl");
  if (!out) throw IoError("cannot write " + (dir / "entries.jsonl").string());
  for (const auto& [id, text] : entries_) out << entry_line(id, text) << '\n';
}

BackTranslationCache BackTranslationCache::load(const std::filesystem::path& dir) {
  std::ifstream min(dir / "manifest.json");
  if (!min) throw IoError("no cache manifest in " + dir.string());
  CacheManifest manifest;
  try {
    const auto j = nlohmann::json::parse(min);
    manifest.provider_id = j.at("provider_id").get<std::string>();
    manifest.pivot_language = j.at("pivot_language").get<std::string>();
    manifest.beam = j.at("beam").get<int>();
    manifest.created = j.value("created", "");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "manifest.json").string(), 1, e.what());
  }

  BackTranslationCache cache(manifest);
  std::ifstream ein(dir / "entries.jsonl");
  std::string line;
  std::size_t line_no = 0;
  while (ein && std::getline(ein, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      cache.insert(j.at("id").get<std::string>(), j.at("text").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError((dir / "entries.jsonl").string(), line_no, e.what());
    }
  }
  return cache;
}

BackTranslationReport back_translate_offline(
    const DomainCorpus& corpus, TranslationProvider& provider, const AugmentationConfig& config,
    BackTranslationCache& cache,
    const std::function<void(const std::string&, const std::string&)>& on_entry) {
  config.validate();
  const CacheManifest wanted{provider.id(), config.pivot_language, config.beam, utc_timestamp()};
  if (cache.has_manifest()) {
    if (!cache.manifest().compatible_with(wanted)) {
      throw ManifestMismatchError(
          "cache was built with provider '" + cache.manifest().provider_id + "', pivot '" +
          cache.manifest().pivot_language + "', beam " + std::to_string(cache.manifest().beam) +
          "; invalidate it explicitly before rebuilding with different settings");
    }
  } else {
    cache.set_manifest(wanted);
  }

  BackTranslationReport report;
  auto process = [&](const Document& doc) {
    if (cache.contains(doc.id)) {
      ++report.reused;
      return;
    }
    ++report.provider_calls;
    try {
      const std::string pivot = provider.translate(doc.text, "en", config.pivot_language, config.beam);
      std::string back = provider.translate(pivot, config.pivot_language, "en", config.beam);
      if (on_entry) on_entry(doc.id, back);
      cache.insert(doc.id, std::move(back));
    } catch (const std::exception& e) {
      report.failed_ids.push_back(doc.id);
      report.failure_messages.push_back(e.what());
    }
  };
  for (const auto& doc : corpus.labeled) process(doc.base);
  for (const auto& doc : corpus.unlabeled) process(doc);
  return report;
}

BackTranslationReport back_translate_to_directory(const DomainCorpus& corpus,
                                                  TranslationProvider& provider,
                                                  const AugmentationConfig& config,
                                                  const std::filesystem::path& dir) {
  BackTranslationCache cache;
  const bool resuming = BackTranslationCache::exists(dir);
  if (resuming) cache = BackTranslationCache::load(dir);

  std::filesystem::create_directories(dir);
  std::ofstream entries(dir / "entries.jsonl", std::ios::app);
  if (!entries) throw IoError("cannot append to " + (dir / "entries.jsonl").string());

  bool manifest_written = resuming;
  auto append = [&](const std::string& id, const std::string& text) {
    if (!manifest_written) {
      write_manifest(dir, cache.manifest());
      manifest_written = true;
    }
    entries << entry_line(id, text) << '\n';
    entries.flush();
  };
  auto report = back_translate_offline(corpus, provider, config, cache, append);
  if (!manifest_written) write_manifest(dir, cache.manifest());
  return report;
}

Augmenter::Augmenter(AugmentationConfig config, const SynonymProvider* synonyms,
                     const BackTranslationCache* cache)
    : config_(std::move(config)), synonyms_(synonyms), cache_(cache) {
  config_.validate();
  if (config_.method == AugmentMethod::synonym_substitution && synonyms_ == nullptr) {
    throw ValidationError("synonym substitution needs a synonym provider");
  }
  if (config_.method == AugmentMethod::back_translation && cache_ == nullptr) {
    throw ValidationError("back translation needs a populated cache");
  }
}

Document Augmenter::make_positive(const Document& doc, Rng& rng) const {
  if (config_.method == AugmentMethod::synonym_substitution) {
    return synonym_substitute(doc, *synonyms_, config_, rng);
  }
  const std::string* text = cache_->find(doc.id);
  if (text == nullptr) throw CacheMissError(doc.id);
  return {doc.id + kPositiveSuffix, *text, doc.domain};
}

}  // namespace domcl
