// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "domcl/error.hpp"
#include "domcl/random.hpp"

namespace domcl {

std::string_view to_string(Label label) {
  return label == Label::positive ? "positive" : "negative";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "positive") return Label::positive;
  if (text == "negative") return Label::negative;
  return std::nullopt;
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto begin = std::find_if_not(text.begin(), text.end(), is_space);
  auto end = std::find_if_not(text.rbegin(), text.rend(), is_space).base();
  return begin < end ? std::string(begin, end) : std::string();
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> LabelDistribution::ratio() const {
  if (n_neg == 0) return std::nullopt;
  return static_cast<double>(n_pos) / static_cast<double>(n_neg);
}

void DomainCorpus::validate() const {
  std::unordered_set<std::string> ids;
  auto check = [&](const Document& doc) {
    if (doc.domain != domain) {
      throw ValidationError("document '" + doc.id + "' has domain '" + doc.domain +
                            "', corpus is '" + domain + "'");
    }
    if (trim(doc.text).empty()) throw ValidationError("document '" + doc.id + "' has empty text");
    if (!ids.insert(doc.id).second) throw ValidationError("duplicate document id '" + doc.id + "'");
  };
  for (const auto& doc : labeled) check(doc.base);
  for (const auto& doc : unlabeled) check(doc);
}

DomainCorpus parse_corpus(std::istream& in, std::string_view domain, const std::string& source) {
  DomainCorpus corpus;
  corpus.domain = std::string(domain);
  std::unordered_set<std::string> ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed record: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(source, line_no, "record is not an object");

    auto string_field = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = record.find(key);
      if (it == record.end() || it->is_null()) {
        if (required) throw ParseError(source, line_no, std::string("missing field '") + key + "'");
        return std::nullopt;
      }
      if (!it->is_string()) {
        throw ParseError(source, line_no, std::string("field '") + key + "' is not a string");
      }
      return it->get<std::string>();
    };

    Document doc;
    doc.text = *string_field("text", true);
    doc.domain = *string_field("domain", true);
    doc.id = string_field("id", false).value_or(corpus.domain + "-" + std::to_string(line_no));

    if (doc.domain != domain) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": record domain '" +
                            doc.domain + "' does not match requested domain '" +
                            std::string(domain) + "'");
    }
    if (trim(doc.text).empty()) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": empty text");
    }
    if (!ids.insert(doc.id).second) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate id '" + doc.id +
                            "'");
    }

    if (auto label_text = string_field("label", false)) {
      auto label = parse_label(*label_text);
      if (!label) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": label '" + *label_text +
                              "' is not one of positive/negative");
      }
      corpus.labeled.push_back({std::move(doc), *label});
    } else {
      corpus.unlabeled.push_back(std::move(doc));
    }
  }
  if (corpus.size() == 0) throw ValidationError(source + ": empty corpus");
  return corpus;
}

DomainCorpus load_corpus(const std::filesystem::path& path, std::string_view domain) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return parse_corpus(in, domain, path.string());
}

void write_corpus(const std::filesystem::path& path, const DomainCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  for (const auto& doc : corpus.labeled) {
    nlohmann::json record = {{"id", doc.base.id},
                             {"text", doc.base.text},
                             {"domain", doc.base.domain},
                             {"label", std::string(to_string(doc.label))}};
    out << record.dump() << '\n';
  }
  for (const auto& doc : corpus.unlabeled) {
    nlohmann::json record = {{"id", doc.id}, {"text", doc.text}, {"domain", doc.domain}};
    out << record.dump() << '\n';
  }
}

std::vector<LabeledDocument> balanced_labeled_sample(const DomainCorpus& corpus,
                                                     std::size_t n_per_class,
                                                     std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < corpus.labeled.size(); ++i) {
    (corpus.labeled[i].label == Label::positive ? pos : neg).push_back(i);
  }
  if (pos.size() < n_per_class) {
    throw CapacityError("class positive has " + std::to_string(pos.size()) + " documents, " +
                        std::to_string(n_per_class) + " requested");
  }
  if (neg.size() < n_per_class) {
    throw CapacityError("class negative has " + std::to_string(neg.size()) + " documents, " +
                        std::to_string(n_per_class) + " requested");
  }

  Rng rng(seed);
  // Partial Fisher-Yates: the first n entries become a uniform draw.
  auto draw = [&](std::vector<std::size_t>& pool) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
    }
    pool.resize(n_per_class);
  };
  draw(pos);
  draw(neg);

  std::vector<std::size_t> chosen = pos;
  chosen.insert(chosen.end(), neg.begin(), neg.end());
  shuffle(std::span<std::size_t>(chosen), rng);

  std::vector<LabeledDocument> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(corpus.labeled[i]);
  return out;
}

LabelDistribution label_distribution(std::span<const LabeledDocument> docs) {
  if (docs.empty()) throw PreconditionError("label_distribution of an empty document list");
  LabelDistribution dist;
  for (const auto& doc : docs) {
    if (doc.label == Label::positive) {
      ++dist.n_pos;
    } else {
      ++dist.n_neg;
    }
  }
  return dist;
}

namespace {
constexpr std::array<BenchmarkDomain, 5> kBenchmarkDomains{{
    {"books", 2000, 6000, 6.43},
    {"dvd", 2000, 34741, 7.39},
    {"electronics", 2000, 13153, 3.65},
    {"kitchen", 2000, 16785, 4.61},
    {"airlines", 2000, 39396, 1.15},
}};
}  // namespace

std::span<const BenchmarkDomain> benchmark_domains() { return kBenchmarkDomains; }

std::optional<BenchmarkDomain> find_benchmark_domain(std::string_view name) {
  const std::string lowered = to_lower(name);
  for (const auto& d : kBenchmarkDomains) {
    if (d.name == lowered) return d;
  }
  return std::nullopt;
}

}  // namespace domcl
