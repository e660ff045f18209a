#include "eval.hpp"

#include <cmath>
#include <unordered_map>

#include "error.hpp"
#include "text.hpp"

namespace sandhi {

namespace {

double ratio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f_score(double p, double r) {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// Half-up rounding to two decimals, on the percentage scale.
std::string format_pct(double fraction) {
  const double pct = fraction * 100.0;
  const auto scaled = static_cast<long long>(std::floor(pct * 100.0 + 0.5));
  std::string s = std::to_string(scaled / 100);
  s += '.';
  const auto frac = static_cast<int>(scaled % 100);
  s += static_cast<char>('0' + frac / 10);
  s += static_cast<char>('0' + frac % 10);
  return s;
}

std::string bucket_label(size_t key) {
  return key == EvalReport::kOverflowBucket ? "10+" : std::to_string(key);
}

}  // namespace

SentenceResult sentence_match(std::span<const std::string> predicted,
                              std::span<const std::string> gold) {
  std::unordered_map<std::string_view, size_t> gold_counts;
  for (const auto& w : gold) ++gold_counts[w];
  size_t matches = 0;
  for (const auto& w : predicted) {
    auto it = gold_counts.find(w);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++matches;
    }
  }
  return {matches, predicted.size(), gold.size(), gold.size()};
}

EvalReport micro_average(std::span<const SentenceResult> results) {
  if (results.empty()) fail(ErrorKind::invalid_argument, "micro_average: no results");

  struct Sums {
    size_t matches = 0, predicted = 0, gold = 0, sentences = 0;
  };
  Sums total;
  std::map<size_t, Sums> buckets;
  for (const auto& r : results) {
    total.matches += r.matches;
    total.predicted += r.predicted_count;
    total.gold += r.gold_count;
    ++total.sentences;
    const size_t key = r.gold_word_len <= 10 ? r.gold_word_len : EvalReport::kOverflowBucket;
    Sums& b = buckets[key];
    b.matches += r.matches;
    b.predicted += r.predicted_count;
    b.gold += r.gold_count;
    ++b.sentences;
  }

  EvalReport report;
  report.micro_precision = ratio(total.matches, total.predicted);
  report.micro_recall = ratio(total.matches, total.gold);
  report.micro_f = f_score(report.micro_precision, report.micro_recall);
  report.total_sentences = total.sentences;
  for (const auto& [key, b] : buckets) {
    report.per_length[key] = {ratio(b.matches, b.predicted), ratio(b.matches, b.gold),
                              b.sentences};
  }
  return report;
}

EvalReport evaluate_corpus(const std::vector<std::vector<std::string>>& predictions,
                           const ParallelCorpus& gold) {
  if (predictions.size() != gold.size()) {
    fail(ErrorKind::invalid_argument,
         "evaluate_corpus: " + std::to_string(predictions.size()) + " predictions vs " +
             std::to_string(gold.size()) + " gold pairs");
  }
  std::vector<SentenceResult> results;
  results.reserve(predictions.size());
  for (size_t i = 0; i < predictions.size(); ++i) {
    const auto gold_words = split_words(gold.pair(i).unsandhied);
    results.push_back(sentence_match(predictions[i], gold_words));
  }
  return micro_average(results);
}

std::string render_report(const EvalReport& report) {
  std::string out;
  out += "sentences: " + std::to_string(report.total_sentences) + "\n";
  out += "micro precision: " + format_pct(report.micro_precision) + "%\n";
  out += "micro recall:    " + format_pct(report.micro_recall) + "%\n";
  out += "micro f-score:   " + format_pct(report.micro_f) + "%\n";
  if (!report.per_length.empty()) {
    out += "\nby gold word count:\n";
    out += "  len     P%      R%   sentences\n";
    for (const auto& [key, b] : report.per_length) {
      std::string label = bucket_label(key);
      out += "  " + label + std::string(label.size() < 4 ? 4 - label.size() : 1, ' ');
      out += format_pct(b.precision) + "  " + format_pct(b.recall) + "  " +
             std::to_string(b.sentence_count) + "\n";
    }
  }
  out += "\n";
  out += "precision\t" + format_double(report.micro_precision) + "\n";
  out += "recall\t" + format_double(report.micro_recall) + "\n";
  out += "f_score\t" + format_double(report.micro_f) + "\n";
  out += "sentences\t" + std::to_string(report.total_sentences) + "\n";
  return out;
}

std::string render_lengths_csv(const EvalReport& report) {
  std::string out = "gold_len,precision,recall,count\n";
  for (const auto& [key, b] : report.per_length) {
    out += bucket_label(key) + "," + format_double(b.precision) + "," +
           format_double(b.recall) + "," + std::to_string(b.sentence_count) + "\n";
  }
  return out;
}

}  // namespace sandhi
