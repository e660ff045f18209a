#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "rng.hpp"

namespace sandhi {

// One euphonic rewrite: when `left_pattern` ends the left word and
// `right_pattern` starts the right word, the boundary fuses as
// left[..-|lp|] + replacement + right[|rp|..].
struct SandhiRule {
  std::string left_pattern;   // nonempty
  std::string right_pattern;  // nonempty
  std::string replacement;    // may be empty (deletion)
  std::string id;
};

// Ordered rule table; the first matching rule wins. No two rules may share
// the same (left_pattern, right_pattern) pair.
//
// File format: UTF-8 text, one rule per line,
// `left_pattern<TAB>right_pattern<TAB>replacement<TAB>id`; `#` starts a
// comment line.
class SandhiRuleSet {
 public:
  SandhiRuleSet(std::vector<SandhiRule> rules, double apply_probability);

  static SandhiRuleSet parse(std::string_view text, double apply_probability,
                             const std::string& origin);
  static SandhiRuleSet load(const std::string& path, double apply_probability);

  const std::vector<SandhiRule>& rules() const { return rules_; }
  double apply_probability() const { return apply_probability_; }

  // First rule whose left_pattern suffixes `left` and right_pattern prefixes
  // `right`, or nullptr.
  const SandhiRule* find_match(std::string_view left, std::string_view right) const;

 private:
  std::vector<SandhiRule> rules_;
  double apply_probability_;
};

// Word inventory for synthetic generation. Words must be nonempty and free of
// spaces and the `_` marker.
class Lexicon {
 public:
  explicit Lexicon(std::vector<std::string> word_forms);

  static Lexicon load(const std::string& path);

  const std::vector<std::string>& word_forms() const { return word_forms_; }
  size_t size() const { return word_forms_.size(); }

 private:
  std::vector<std::string> word_forms_;
};

// Fuses the boundary per the first matching rule, or returns
// `left + " " + right` when nothing matches.
std::string apply_rule(std::string_view left, std::string_view right,
                       const SandhiRuleSet& rules);

// Left-to-right fold over the word sequence; each boundary draws once from
// `rng` and fuses with probability rules.apply_probability().
// Returns (sandhied, unsandhied).
std::pair<std::string, std::string> generate_pair(std::span<const std::string> words,
                                                  const SandhiRuleSet& rules, Rng& rng);

// n pairs with word counts uniform in [min_words, max_words] and words drawn
// uniformly from the lexicon; a pure function of its arguments.
ParallelCorpus generate_corpus(const Lexicon& lexicon, size_t n, uint32_t min_words,
                               uint32_t max_words, const SandhiRuleSet& rules,
                               uint64_t seed);

}  // namespace sandhi
