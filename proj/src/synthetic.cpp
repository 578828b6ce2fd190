// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "domcl/error.hpp"
#include "domcl/random.hpp"

namespace domcl {

namespace {

struct Vocabulary {
  std::vector<std::string> topic;
  std::vector<std::string> positive;
  std::vector<std::string> negative;
};

std::vector<std::string> words(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Vocabulary domain_vocabulary(const std::string& domain, const SyntheticOptions& o) {
  return {words(domain + "topic", o.topic_words), words(domain + "good", o.domain_sentiment_words),
          words(domain + "bad", o.domain_sentiment_words)};
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[uniform_index(rng, pool.size())];
}

std::string make_text(Label label, const Vocabulary& domain, const Vocabulary& shared,
                      const SyntheticOptions& o, Rng& rng) {
  std::vector<std::string> tokens;
  auto sentiment = [&](const Vocabulary& v, double noise) {
    const bool flip = uniform01(rng) < noise;
    const bool positive = (label == Label::positive) != flip;
    return pick(positive ? v.positive : v.negative, rng);
  };
  for (std::size_t i = 0; i < o.domain_sentiment_per_doc; ++i) {
    tokens.push_back(sentiment(domain, o.domain_sentiment_noise));
  }
  for (std::size_t i = 0; i < o.shared_sentiment_per_doc; ++i) {
    tokens.push_back(sentiment(shared, o.shared_sentiment_noise));
  }
  while (tokens.size() < o.doc_length) tokens.push_back(pick(domain.topic, rng));
  shuffle(std::span<std::string>(tokens), rng);

  std::string text;
  for (const auto& t : tokens) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  return text;
}

SyntheticDomain make_domain(const SyntheticDomainSpec& spec, const Vocabulary& vocab,
                            const Vocabulary& shared, const SyntheticOptions& o, Rng& rng) {
  if (!(spec.unlabeled_pos_neg_ratio > 0.0)) {
    throw ValidationError("synthetic domain ratio must be positive");
  }
  SyntheticDomain domain;
  domain.corpus.domain = spec.name;
  std::size_t serial = 0;
  auto next_id = [&] { return spec.name + "-" + std::to_string(serial++); };

  for (std::size_t i = 0; i < 2 * spec.labeled_per_class; ++i) {
    const Label label = i % 2 == 0 ? Label::positive : Label::negative;
    domain.corpus.labeled.push_back({{next_id(), make_text(label, vocab, shared, o, rng), spec.name}, label});
  }

  const auto n_pos = static_cast<std::size_t>(std::llround(
      static_cast<double>(spec.unlabeled) * spec.unlabeled_pos_neg_ratio /
      (1.0 + spec.unlabeled_pos_neg_ratio)));
  std::vector<Label> labels(spec.unlabeled, Label::negative);
  std::fill_n(labels.begin(), std::min(n_pos, labels.size()), Label::positive);
  shuffle(std::span<Label>(labels), rng);
  for (Label label : labels) {
    domain.corpus.unlabeled.push_back({next_id(), make_text(label, vocab, shared, o, rng), spec.name});
    domain.unlabeled_gold.push_back(label);
  }

  for (std::size_t i = 0; i < 2 * spec.test_per_class; ++i) {
    const Label label = i % 2 == 0 ? Label::positive : Label::negative;
    domain.test.push_back({{spec.name + "-test-" + std::to_string(i),
                            make_text(label, vocab, shared, o, rng), spec.name},
                           label});
  }
  return domain;
}

/// Synonyms of one polarity drawn from the shared pool and the word's own
/// domain pool.
void link_sentiment(LexiconSynonymProvider& lexicon, const std::vector<std::string>& own,
                    const std::vector<std::string>& shared, std::size_t k, Rng& rng) {
  for (const auto& word : own) {
    std::vector<std::string> syn;
    for (std::size_t i = 0; i < k; ++i) syn.push_back(pick(shared, rng));
    for (std::size_t i = 0; i < k; ++i) syn.push_back(pick(own, rng));
    lexicon.add(word, syn);
  }
}

void link_topics(LexiconSynonymProvider& lexicon, const std::vector<std::string>& topics,
                 std::size_t k, Rng& rng) {
  for (const auto& word : topics) {
    std::vector<std::string> syn;
    for (std::size_t i = 0; i < k; ++i) syn.push_back(pick(topics, rng));
    lexicon.add(word, syn);
  }
}

}  // namespace

SyntheticBenchmark make_synthetic_benchmark(const SyntheticOptions& options,
                                            const SyntheticDomainSpec& source,
                                            const SyntheticDomainSpec& target) {
  if (source.name == target.name) throw ValidationError("synthetic domains need distinct names");
  if (options.doc_length < options.domain_sentiment_per_doc + options.shared_sentiment_per_doc) {
    throw ValidationError("synthetic doc_length too short for its sentiment words");
  }
  Rng rng = make_rng({options.seed, 0x73796e7468ULL});
  const Vocabulary shared{{}, words("sharedgood", options.shared_sentiment_words),
                          words("sharedbad", options.shared_sentiment_words)};
  const Vocabulary source_vocab = domain_vocabulary(source.name, options);
  const Vocabulary target_vocab = domain_vocabulary(target.name, options);

  SyntheticBenchmark bench{make_domain(source, source_vocab, shared, options, rng),
                           make_domain(target, target_vocab, shared, options, rng),
                           LexiconSynonymProvider("synthetic-lexicon")};

  const std::size_t k = options.synonyms_per_word;
  for (const Vocabulary* v : {&source_vocab, &target_vocab}) {
    link_sentiment(bench.lexicon, v->positive, shared.positive, k, rng);
    link_sentiment(bench.lexicon, v->negative, shared.negative, k, rng);
    link_topics(bench.lexicon, v->topic, k, rng);
  }
  // Shared words point into both domains.
  for (const auto* pair : {&source_vocab, &target_vocab}) {
    for (const auto& word : shared.positive) bench.lexicon.add(word, {pick(pair->positive, rng)});
    for (const auto& word : shared.negative) bench.lexicon.add(word, {pick(pair->negative, rng)});
  }
  return bench;
}

void write_lexicon(const std::filesystem::path& path, const SyntheticBenchmark& benchmark) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<std::string> keys;
  for (const auto& [word, _] : benchmark.lexicon.entries()) keys.push_back(word);
  std::sort(keys.begin(), keys.end());
  for (const auto& word : keys) {
    out << word << '\t';
    const auto& syn = benchmark.lexicon.entries().at(word);
    for (std::size_t i = 0; i < syn.size(); ++i) out << (i ? " " : "") << syn[i];
    out << '\n';
  }
}

}  // namespace domcl
