#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sandhi {

struct ParallelPair {
  std::string sandhied;
  std::string unsandhied;

  bool operator==(const ParallelPair&) const = default;
};

// Ordered collection of (sandhied, unsandhied) sentence pairs.
//
// File format: UTF-8 text, one pair per line, `sandhied<TAB>unsandhied`,
// LF line endings, no trailing whitespace.
class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  explicit ParallelCorpus(std::vector<ParallelPair> pairs) : pairs_(std::move(pairs)) {}

  static ParallelCorpus parse(std::string_view text, const std::string& origin);
  static ParallelCorpus load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_text() const;

  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const ParallelPair& pair(size_t i) const { return pairs_[i]; }
  const std::vector<ParallelPair>& pairs() const { return pairs_; }
  void add(ParallelPair p) { pairs_.push_back(std::move(p)); }

  // Both columns in file order, sandhied before unsandhied per pair; this is
  // what vocabulary learning consumes.
  std::vector<std::string> all_lines() const;

  // Seeded, line-hash based partition: each pair lands in train, test or
  // neither depending on where its hash falls in [0,1). Stable across runs
  // and independent of pair order.
  // Requires 0 < train_frac <= 1, 0 <= test_frac < 1, train_frac + test_frac <= 1.
  std::pair<ParallelCorpus, ParallelCorpus> split_train_test(double train_frac,
                                                             double test_frac,
                                                             uint64_t seed) const;

  // Drops every pair whose `sandhied<TAB>unsandhied` line appears in
  // `excluded_lines` (exact match).
  ParallelCorpus without_lines(const std::vector<std::string>& excluded_lines) const;

 private:
  std::vector<ParallelPair> pairs_;
};

}  // namespace sandhi
