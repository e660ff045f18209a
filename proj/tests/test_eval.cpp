#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eval.hpp"
#include "rng.hpp"
#include "text.hpp"

using namespace sandhi;

namespace {

std::vector<std::string> words(std::string_view s) { return split_words(s); }

}  // namespace

TEST_CASE("sentence_match identity") {
  const auto w = words("rāmaḥ vanam gacchati");
  const auto r = sentence_match(w, w);
  CHECK(r.matches == 3);
  CHECK(r.predicted_count == 3);
  CHECK(r.gold_count == 3);
  CHECK(r.gold_word_len == 3);
}

TEST_CASE("sentence_match partial overlap") {
  const auto r = sentence_match(words("rāmaḥ vanaṃgacchati"), words("rāmaḥ vanam gacchati"));
  CHECK(r.matches == 1);
  CHECK(r.predicted_count == 2);
  CHECK(r.gold_count == 3);
}

TEST_CASE("sentence_match multiset semantics") {
  CHECK(sentence_match(words("a a"), words("a")).matches == 1);
  CHECK(sentence_match(words("a"), words("a a")).matches == 1);
  CHECK(sentence_match(words("a a b"), words("b a a")).matches == 3);
  CHECK(sentence_match({}, words("a")).matches == 0);
  CHECK(sentence_match(words("a"), {}).matches == 0);
}

TEST_CASE("sentence_match is order-insensitive") {
  Rng rng(4);
  std::vector<std::string> pool{"a", "b", "c", "a", "b", "d", "a"};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::string> pred, gold;
    for (size_t i = 0; i < 5; ++i) pred.push_back(pool[rng.uniform_int(0, pool.size() - 1)]);
    for (size_t i = 0; i < 4; ++i) gold.push_back(pool[rng.uniform_int(0, pool.size() - 1)]);
    const auto base = sentence_match(pred, gold);
    std::vector<std::string> pred_shuffled = pred, gold_shuffled = gold;
    rng.shuffle(pred_shuffled);
    rng.shuffle(gold_shuffled);
    const auto shuffled = sentence_match(pred_shuffled, gold_shuffled);
    CHECK(base.matches == shuffled.matches);
    CHECK(base.matches <= std::min(base.predicted_count, base.gold_count));
  }
}

TEST_CASE("micro_average hand-computed example") {
  // (1,2,3) and (2,2,2): P = 3/4, R = 3/5, F = 2/3
  const std::vector<SentenceResult> results{{1, 2, 3, 3}, {2, 2, 2, 2}};
  const auto report = micro_average(results);
  CHECK(report.micro_precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.micro_recall == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(report.micro_f == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.total_sentences == 2);
}

TEST_CASE("micro_average of a single sentence is its own P/R/F") {
  const std::vector<SentenceResult> results{{3, 4, 6, 6}};
  const auto report = micro_average(results);
  CHECK(report.micro_precision == doctest::Approx(0.75));
  CHECK(report.micro_recall == doctest::Approx(0.5));
  const double f = 2.0 * 0.75 * 0.5 / 1.25;
  CHECK(report.micro_f == doctest::Approx(f));
}

TEST_CASE("micro_average rejects empty input and handles zero counts") {
  CHECK_THROWS_AS(micro_average({}), Error);
  // all-empty predictions: P and R are 0/0 and 0/n, F defined as 0
  const std::vector<SentenceResult> results{{0, 0, 3, 3}, {0, 0, 2, 2}};
  const auto report = micro_average(results);
  CHECK(report.micro_precision == 0.0);
  CHECK(report.micro_recall == 0.0);
  CHECK(report.micro_f == 0.0);
}

TEST_CASE("reported F-scores are the harmonic mean of the reported P and R") {
  // percentage-scale cross-check rows: P, R, expected F
  struct Row {
    double p, r, f;
  };
  const std::vector<Row> rows{
      {65.20, 66.50, 65.84},
      {76.30, 79.47, 77.85},
      {73.44, 73.04, 73.24},
      {90.77, 90.30, 90.53},
  };
  for (const auto& row : rows) {
    const double f = 2.0 * row.p * row.r / (row.p + row.r);
    CHECK(std::abs(f - row.f) <= 0.01);  // within 0.01 percentage points
  }
}

TEST_CASE("per-length buckets group by gold word count") {
  std::vector<SentenceResult> results;
  results.push_back({2, 2, 2, 2});    // len 2, perfect
  results.push_back({1, 2, 2, 2});    // len 2, half precision
  results.push_back({3, 3, 3, 3});    // len 3
  results.push_back({5, 12, 12, 12});  // len 12 -> overflow bucket
  const auto report = micro_average(results);
  REQUIRE(report.per_length.size() == 3);
  const auto& len2 = report.per_length.at(2);
  CHECK(len2.sentence_count == 2);
  CHECK(len2.precision == doctest::Approx(3.0 / 4.0));
  CHECK(len2.recall == doctest::Approx(3.0 / 4.0));
  CHECK(report.per_length.at(3).sentence_count == 1);
  const auto& overflow = report.per_length.at(EvalReport::kOverflowBucket);
  CHECK(overflow.sentence_count == 1);
  CHECK(overflow.precision == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("harmonic mean bounds hold") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SentenceResult> results;
    const size_t n = rng.uniform_int(1, 6);
    for (size_t i = 0; i < n; ++i) {
      const size_t gold = rng.uniform_int(1, 8);
      const size_t pred = rng.uniform_int(0, 8);
      const size_t match = rng.uniform_int(0, std::min(gold, pred));
      results.push_back({match, pred, gold, gold});
    }
    const auto r = micro_average(results);
    CHECK(r.micro_precision >= 0.0);
    CHECK(r.micro_precision <= 1.0);
    CHECK(r.micro_recall >= 0.0);
    CHECK(r.micro_recall <= 1.0);
    CHECK(r.micro_f >= 0.0);
    CHECK(r.micro_f <= 1.0);
    if (r.micro_precision > 0.0 && r.micro_recall > 0.0) {
      CHECK(r.micro_f <= std::max(r.micro_precision, r.micro_recall) + 1e-12);
      CHECK(r.micro_f >= std::min(r.micro_precision, r.micro_recall) - 1e-12);
    }
  }
}

TEST_CASE("evaluate_corpus pairs predictions with gold lines") {
  ParallelCorpus gold({{"rāmeti", "rāma iti"}, {"cāpi ceti", "ca api ca iti"}});
  {
    const std::vector<std::vector<std::string>> perfect{words("rāma iti"),
                                                        words("ca api ca iti")};
    const auto report = evaluate_corpus(perfect, gold);
    CHECK(report.micro_precision == 1.0);
    CHECK(report.micro_recall == 1.0);
    CHECK(report.micro_f == 1.0);
  }
  {
    const std::vector<std::vector<std::string>> empty{{}, {}};
    const auto report = evaluate_corpus(empty, gold);
    CHECK(report.micro_precision == 0.0);
    CHECK(report.micro_recall == 0.0);
    CHECK(report.micro_f == 0.0);
  }
  const std::vector<std::vector<std::string>> short_list{words("rāma iti")};
  CHECK_THROWS_AS(evaluate_corpus(short_list, gold), Error);
}

TEST_CASE("report rendering carries half-up two-decimal percentages") {
  const std::vector<SentenceResult> results{{1, 2, 3, 3}, {2, 2, 2, 2}};
  const auto report = micro_average(results);
  const std::string text = render_report(report);
  CHECK(text.find("75.00%") != std::string::npos);   // precision 3/4
  CHECK(text.find("60.00%") != std::string::npos);   // recall 3/5
  CHECK(text.find("66.67%") != std::string::npos);   // F 2/3 rounds half-up
  CHECK(text.find("precision\t0.75\n") != std::string::npos);
  CHECK(text.find("recall\t0.6\n") != std::string::npos);

  const std::string csv = render_lengths_csv(report);
  CHECK(csv.starts_with("gold_len,precision,recall,count\n"));
  CHECK(csv.find("\n2,") != std::string::npos);
  CHECK(csv.find("\n3,") != std::string::npos);
}

TEST_CASE("overflow bucket renders as 10+") {
  std::vector<SentenceResult> results{{11, 11, 11, 11}, {12, 12, 12, 12}};
  const auto report = micro_average(results);
  const std::string csv = render_lengths_csv(report);
  CHECK(csv.find("10+,1,1,2\n") != std::string::npos);
}
