#include "corpus.hpp"

#include <unordered_set>

#include "error.hpp"
#include "text.hpp"

namespace sandhi {

namespace {

// FNV-1a over the pair line, seed folded into the offset basis.
uint64_t line_hash(std::string_view line, uint64_t seed) {
  uint64_t h = 0xCBF29CE484222325ULL ^ (seed * 0x100000001B3ULL);
  for (unsigned char c : line) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string pair_line(const ParallelPair& p) {
  return p.sandhied + "\t" + p.unsandhied;
}

}  // namespace

ParallelCorpus ParallelCorpus::parse(std::string_view text, const std::string& origin) {
  std::vector<ParallelPair> pairs;
  const auto lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::string at = origin + ":" + std::to_string(i + 1);
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorKind::parse, at + ": missing TAB separator");
    if (line.find('\t', tab + 1) != std::string::npos) {
      fail(ErrorKind::parse, at + ": more than one TAB");
    }
    if (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      fail(ErrorKind::parse, at + ": trailing whitespace");
    }
    ParallelPair p{line.substr(0, tab), line.substr(tab + 1)};
    if (p.sandhied.empty() || p.unsandhied.empty()) {
      fail(ErrorKind::parse, at + ": empty field");
    }
    pairs.push_back(std::move(p));
  }
  return ParallelCorpus(std::move(pairs));
}

ParallelCorpus ParallelCorpus::load(const std::string& path) {
  return parse(read_file(path), path);
}

std::string ParallelCorpus::to_text() const {
  std::string out;
  for (const auto& p : pairs_) {
    out += p.sandhied;
    out += '\t';
    out += p.unsandhied;
    out += '\n';
  }
  return out;
}

void ParallelCorpus::save(const std::string& path) const {
  write_file(path, to_text());
}

std::vector<std::string> ParallelCorpus::all_lines() const {
  std::vector<std::string> lines;
  lines.reserve(pairs_.size() * 2);
  for (const auto& p : pairs_) {
    lines.push_back(p.sandhied);
    lines.push_back(p.unsandhied);
  }
  return lines;
}

std::pair<ParallelCorpus, ParallelCorpus> ParallelCorpus::split_train_test(
    double train_frac, double test_frac, uint64_t seed) const {
  if (!(train_frac > 0.0 && train_frac <= 1.0) || !(test_frac >= 0.0 && test_frac < 1.0) ||
      train_frac + test_frac > 1.0) {
    fail(ErrorKind::invalid_argument, "invalid split fractions");
  }
  ParallelCorpus train, test;
  for (const auto& p : pairs_) {
    const double u =
        static_cast<double>(line_hash(pair_line(p), seed) >> 11) * 0x1.0p-53;
    if (u < train_frac) {
      train.add(p);
    } else if (u < train_frac + test_frac) {
      test.add(p);
    }
  }
  return {std::move(train), std::move(test)};
}

ParallelCorpus ParallelCorpus::without_lines(
    const std::vector<std::string>& excluded_lines) const {
  std::unordered_set<std::string> excluded(excluded_lines.begin(), excluded_lines.end());
  ParallelCorpus kept;
  for (const auto& p : pairs_) {
    if (!excluded.contains(pair_line(p))) kept.add(p);
  }
  return kept;
}

}  // namespace sandhi
