#include "rules.hpp"

#include <set>
#include <unordered_set>

#include "error.hpp"
#include "text.hpp"

namespace sandhi {

SandhiRuleSet::SandhiRuleSet(std::vector<SandhiRule> rules, double apply_probability)
    : rules_(std::move(rules)), apply_probability_(apply_probability) {
  if (!(apply_probability_ >= 0.0 && apply_probability_ <= 1.0)) {
    fail(ErrorKind::invalid_argument, "apply_probability must be in [0,1]");
  }
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (const auto& r : rules_) {
    if (r.left_pattern.empty() || r.right_pattern.empty()) {
      fail(ErrorKind::invalid_argument, "rule '" + r.id + "': empty pattern");
    }
    if (!seen.insert({r.left_pattern, r.right_pattern}).second) {
      fail(ErrorKind::invalid_argument,
           "duplicate rule patterns (" + r.left_pattern + ", " + r.right_pattern + ")");
    }
  }
}

SandhiRuleSet SandhiRuleSet::parse(std::string_view text, double apply_probability,
                                   const std::string& origin) {
  std::vector<SandhiRule> rules;
  const auto lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const std::string at = origin + ":" + std::to_string(i + 1);
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 4) {
      fail(ErrorKind::parse,
           at + ": expected 4 TAB-separated fields, got " + std::to_string(fields.size()));
    }
    rules.push_back(SandhiRule{fields[0], fields[1], fields[2], fields[3]});
  }
  return SandhiRuleSet(std::move(rules), apply_probability);
}

SandhiRuleSet SandhiRuleSet::load(const std::string& path, double apply_probability) {
  return parse(read_file(path), apply_probability, path);
}

const SandhiRule* SandhiRuleSet::find_match(std::string_view left,
                                            std::string_view right) const {
  for (const auto& r : rules_) {
    if (left.size() >= r.left_pattern.size() && right.size() >= r.right_pattern.size() &&
        left.ends_with(r.left_pattern) && right.starts_with(r.right_pattern)) {
      return &r;
    }
  }
  return nullptr;
}

Lexicon::Lexicon(std::vector<std::string> word_forms) : word_forms_(std::move(word_forms)) {
  if (word_forms_.empty()) fail(ErrorKind::invalid_argument, "lexicon is empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& w : word_forms_) {
    if (w.empty()) fail(ErrorKind::invalid_argument, "lexicon contains an empty word");
    if (w.find(' ') != std::string::npos || w.find('_') != std::string::npos) {
      fail(ErrorKind::invalid_argument, "lexicon word '" + w + "' contains space or '_'");
    }
    if (!seen.insert(w).second) {
      fail(ErrorKind::invalid_argument, "duplicate lexicon word '" + w + "'");
    }
  }
}

Lexicon Lexicon::load(const std::string& path) {
  std::vector<std::string> words;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    words.push_back(line);
  }
  return Lexicon(std::move(words));
}

std::string apply_rule(std::string_view left, std::string_view right,
                       const SandhiRuleSet& rules) {
  if (const SandhiRule* r = rules.find_match(left, right)) {
    std::string fused(left.substr(0, left.size() - r->left_pattern.size()));
    fused += r->replacement;
    fused += right.substr(r->right_pattern.size());
    return fused;
  }
  std::string kept(left);
  kept += ' ';
  kept += right;
  return kept;
}

std::pair<std::string, std::string> generate_pair(std::span<const std::string> words,
                                                  const SandhiRuleSet& rules, Rng& rng) {
  if (words.empty()) fail(ErrorKind::invalid_argument, "generate_pair: empty word sequence");
  std::string unsandhied = join_words(words);
  std::string sandhied = words[0];
  for (size_t i = 1; i < words.size(); ++i) {
    // One draw per boundary regardless of outcome, so the stream position is
    // a function of the boundary index alone.
    const bool try_fuse = rng.uniform() < rules.apply_probability();
    if (try_fuse) {
      sandhied = apply_rule(sandhied, words[i], rules);
    } else {
      sandhied += ' ';
      sandhied += words[i];
    }
  }
  return {std::move(sandhied), std::move(unsandhied)};
}

ParallelCorpus generate_corpus(const Lexicon& lexicon, size_t n, uint32_t min_words,
                               uint32_t max_words, const SandhiRuleSet& rules,
                               uint64_t seed) {
  if (n == 0) fail(ErrorKind::invalid_argument, "generate_corpus: n must be positive");
  if (min_words < 1 || min_words > max_words) {
    fail(ErrorKind::invalid_argument, "generate_corpus: need 1 <= min_words <= max_words");
  }
  Rng rng(seed);
  ParallelCorpus corpus;
  std::vector<std::string> words;
  for (size_t i = 0; i < n; ++i) {
    const auto count = static_cast<size_t>(rng.uniform_int(min_words, max_words));
    words.clear();
    for (size_t k = 0; k < count; ++k) {
      words.push_back(lexicon.word_forms()[rng.uniform_int(0, lexicon.size() - 1)]);
    }
    auto [sandhied, unsandhied] = generate_pair(words, rules, rng);
    corpus.add({std::move(sandhied), std::move(unsandhied)});
  }
  return corpus;
}

}  // namespace sandhi
