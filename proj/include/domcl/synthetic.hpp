// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic two-domain sentiment benchmark for desk-scale experiments.
//
// Each domain has its own topic words and its own sentiment words; a small
// set of sentiment words is shared across domains. A document mixes topic
// words, a few domain sentiment words and one shared sentiment word. The
// generated lexicon links every sentiment word to shared and in-domain
// sentiment words of the same polarity, and topic words to other topic
// words of their domain, so synonym substitution produces cross-vocabulary
// positive views.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "domcl/augment.hpp"
#include "domcl/corpus.hpp"

namespace domcl {

struct SyntheticDomainSpec {
  std::string name;
  std::size_t labeled_per_class = 0;
  std::size_t unlabeled = 0;
  double unlabeled_pos_neg_ratio = 1.0;
  std::size_t test_per_class = 0;
};

struct SyntheticOptions {
  std::size_t topic_words = 150;
  std::size_t domain_sentiment_words = 15;  // per polarity per domain
  std::size_t shared_sentiment_words = 15;  // per polarity
  std::size_t doc_length = 12;
  std::size_t domain_sentiment_per_doc = 2;
  std::size_t shared_sentiment_per_doc = 1;
  double domain_sentiment_noise = 0.05;  // chance a domain sentiment word has the wrong polarity
  double shared_sentiment_noise = 0.2;
  std::size_t synonyms_per_word = 3;
  std::uint64_t seed = 0;
};

struct SyntheticDomain {
  DomainCorpus corpus;                // labeled + unlabeled (labels hidden)
  std::vector<Label> unlabeled_gold;  // hidden labels, same order as corpus.unlabeled
  std::vector<LabeledDocument> test;  // balanced held-out labeled set
};

struct SyntheticBenchmark {
  SyntheticDomain source;
  SyntheticDomain target;
  LexiconSynonymProvider lexicon;
};

SyntheticBenchmark make_synthetic_benchmark(const SyntheticOptions& options,
                                            const SyntheticDomainSpec& source,
                                            const SyntheticDomainSpec& target);

/// Writes the lexicon as `word<TAB>syn1 syn2 ...` lines readable by
/// LexiconSynonymProvider::load.
void write_lexicon(const std::filesystem::path& path, const SyntheticBenchmark& benchmark);

}  // namespace domcl
