#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace sandhi {

struct SentenceResult {
  size_t matches = 0;
  size_t predicted_count = 0;
  size_t gold_count = 0;
  size_t gold_word_len = 0;
};

struct LengthBucket {
  double precision = 0.0;
  double recall = 0.0;
  size_t sentence_count = 0;
};

struct EvalReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f = 0.0;
  // Keyed by exact gold word count 1..10; kOverflowBucket collects longer
  // sentences ("10+").
  std::map<size_t, LengthBucket> per_length;
  size_t total_sentences = 0;

  static constexpr size_t kOverflowBucket = 11;
};

// Order-insensitive multiset intersection of surface word forms:
// matches = sum over distinct w of min(count_pred(w), count_gold(w)).
SentenceResult sentence_match(std::span<const std::string> predicted,
                              std::span<const std::string> gold);

// Micro averaging: P = sum(matches)/sum(predicted), R = sum(matches)/sum(gold),
// F = 2PR/(P+R); 0/0 counts as 0 throughout.
EvalReport micro_average(std::span<const SentenceResult> results);

// Pairs predictions with the gold unsandhied sides split on spaces.
EvalReport evaluate_corpus(const std::vector<std::vector<std::string>>& predictions,
                           const ParallelCorpus& gold);

// Human-readable table (percentages, 2 decimals, half-up) followed by a
// machine block of `metric<TAB>value` lines holding the raw ratios.
std::string render_report(const EvalReport& report);

// `gold_len,precision,recall,count` rows, ascending, overflow bucket last.
std::string render_lengths_csv(const EvalReport& report);

}  // namespace sandhi
