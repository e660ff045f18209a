#include "vocab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "error.hpp"
#include "text.hpp"

namespace sandhi {

namespace {

constexpr const char* kHeaderPrefix = "#gibberish-vocab v1 size=";
constexpr const char* kSpecialNames[4] = {"<pad>", "<s>", "</s>", "<unk>"};

uint64_t pair_key(int32_t a, int32_t b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint32_t>(b);
}

struct MergeCandidate {
  double score = 0.0;
  int64_t pair_count = 0;
  std::u32string merged;
  std::u32string left, right;
  int32_t a = -1, b = -1;

  bool beats(const MergeCandidate& other) const {
    if (score != other.score) return score > other.score;
    if (pair_count != other.pair_count) return pair_count > other.pair_count;
    if (merged != other.merged) return merged < other.merged;
    if (left != other.left) return left < other.left;
    return right < other.right;
  }
};

}  // namespace

SubwordVocab SubwordVocab::learn(std::span<const std::string> lines, uint32_t target_size) {
  if (lines.empty()) fail(ErrorKind::invalid_argument, "learn_vocab: empty corpus");

  std::vector<std::u32string> corpus;
  size_t total_chars = 0;
  for (const auto& line : lines) {
    std::u32string u = utf8_decode(line);
    std::replace(u.begin(), u.end(), U' ', kSpaceMarker);
    total_chars += u.size();
    if (!u.empty()) corpus.push_back(std::move(u));
  }
  if (total_chars == 0) fail(ErrorKind::invalid_argument, "learn_vocab: empty corpus");

  std::set<char32_t> alpha_set;
  for (const auto& u : corpus) alpha_set.insert(u.begin(), u.end());

  // Internal ids: 0..|alphabet|-1 are the sorted alphabet, merges follow.
  // Public ids add the 4 specials in front.
  std::vector<std::u32string> piece_strs;
  std::unordered_map<std::u32string, int32_t> intern;
  for (char32_t cp : alpha_set) {
    intern.emplace(std::u32string(1, cp), static_cast<int32_t>(piece_strs.size()));
    piece_strs.emplace_back(1, cp);
  }

  if (target_size < kNumSpecials + piece_strs.size()) {
    fail(ErrorKind::invalid_argument,
         "learn_vocab: target size " + std::to_string(target_size) +
             " is below alphabet (" + std::to_string(piece_strs.size()) + ") + " +
             std::to_string(kNumSpecials) + " specials");
  }

  std::vector<std::vector<int32_t>> seg;
  seg.reserve(corpus.size());
  for (const auto& u : corpus) {
    std::vector<int32_t> ids;
    ids.reserve(u.size());
    for (char32_t cp : u) ids.push_back(intern.at(std::u32string(1, cp)));
    seg.push_back(std::move(ids));
  }

  std::vector<int64_t> piece_count;
  auto recount = [&](std::unordered_map<uint64_t, int64_t>* pair_count) {
    piece_count.assign(piece_strs.size(), 0);
    for (const auto& ids : seg) {
      for (size_t k = 0; k < ids.size(); ++k) {
        ++piece_count[static_cast<size_t>(ids[k])];
        if (pair_count && k + 1 < ids.size()) {
          ++(*pair_count)[pair_key(ids[k], ids[k + 1])];
        }
      }
    }
  };

  while (kNumSpecials + piece_strs.size() < target_size) {
    std::unordered_map<uint64_t, int64_t> pair_count;
    recount(&pair_count);

    MergeCandidate best;
    bool found = false;
    for (const auto& [key, pc] : pair_count) {
      if (pc < 2) continue;  // singleton merges add no likelihood
      const auto a = static_cast<int32_t>(key >> 32);
      const auto b = static_cast<int32_t>(key & 0xFFFFFFFFu);
      MergeCandidate cand;
      cand.score = static_cast<double>(pc) /
                   (static_cast<double>(piece_count[static_cast<size_t>(a)]) *
                    static_cast<double>(piece_count[static_cast<size_t>(b)]));
      cand.pair_count = pc;
      cand.left = piece_strs[static_cast<size_t>(a)];
      cand.right = piece_strs[static_cast<size_t>(b)];
      cand.merged = cand.left + cand.right;
      cand.a = a;
      cand.b = b;
      if (!found || cand.beats(best)) {
        best = std::move(cand);
        found = true;
      }
    }
    if (!found) break;

    int32_t merged_id;
    if (auto it = intern.find(best.merged); it != intern.end()) {
      merged_id = it->second;
    } else {
      merged_id = static_cast<int32_t>(piece_strs.size());
      intern.emplace(best.merged, merged_id);
      piece_strs.push_back(best.merged);
    }

    for (auto& ids : seg) {
      size_t w = 0;
      for (size_t k = 0; k < ids.size();) {
        if (k + 1 < ids.size() && ids[k] == best.a && ids[k + 1] == best.b) {
          ids[w++] = merged_id;
          k += 2;
        } else {
          ids[w++] = ids[k];
          k += 1;
        }
      }
      ids.resize(w);
    }
  }

  recount(nullptr);
  int64_t total = 0;
  for (int64_t c : piece_count) total += c;

  SubwordVocab vocab;
  vocab.pieces_.reserve(kNumSpecials + piece_strs.size());
  for (const char* name : kSpecialNames) vocab.pieces_.push_back({name, 0.0});
  for (size_t i = 0; i < piece_strs.size(); ++i) {
    const double score =
        piece_count[i] > 0
            ? std::log(static_cast<double>(piece_count[i]) / static_cast<double>(total))
            : -std::numeric_limits<double>::infinity();
    vocab.pieces_.push_back({utf8_encode(piece_strs[i]), score});
  }
  vocab.alphabet_size_ = static_cast<int32_t>(alpha_set.size());
  vocab.build_index();
  return vocab;
}

void SubwordVocab::build_index() {
  index_.clear();
  max_piece_len_ = 0;
  for (int32_t id = kNumSpecials; id < size(); ++id) {
    std::u32string u = utf8_decode(pieces_[static_cast<size_t>(id)].text);
    max_piece_len_ = std::max(max_piece_len_, u.size());
    if (!index_.emplace(std::move(u), id).second) {
      fail(ErrorKind::format, "duplicate piece '" + pieces_[static_cast<size_t>(id)].text + "'");
    }
  }
}

std::optional<int32_t> SubwordVocab::id_of(std::string_view piece_text) const {
  for (int32_t id = 0; id < kNumSpecials; ++id) {
    if (pieces_[static_cast<size_t>(id)].text == piece_text) return id;
  }
  auto it = index_.find(utf8_decode(piece_text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int32_t> SubwordVocab::encode(std::string_view text) const {
  std::u32string u = utf8_decode(text);
  std::replace(u.begin(), u.end(), U' ', kSpaceMarker);
  const size_t n = u.size();

  // Suffix DP: best[i] = max total score of a segmentation of u[i..n); the
  // forward reconstruction then realizes the "longer first piece" tie rule at
  // every position.
  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> best(n + 1, kUnset);
  std::vector<int32_t> pick_id(n, kUnkId);
  std::vector<size_t> pick_len(n, 1);
  best[n] = 0.0;
  std::u32string probe;
  for (size_t i = n; i-- > 0;) {
    bool found = false;
    const size_t limit = std::min(max_piece_len_, n - i);
    for (size_t len = 1; len <= limit; ++len) {
      probe.assign(u, i, len);
      auto it = index_.find(probe);
      if (it == index_.end()) continue;
      const double cand = pieces_[static_cast<size_t>(it->second)].score + best[i + len];
      if (!found || cand > best[i] || (cand == best[i] && len > pick_len[i])) {
        best[i] = cand;
        pick_id[i] = it->second;
        pick_len[i] = len;
        found = true;
      }
    }
    if (!found) {
      // No piece starts here, so u[i] is outside the alphabet: one unk.
      best[i] = best[i + 1];
      pick_id[i] = kUnkId;
      pick_len[i] = 1;
    }
  }

  std::vector<int32_t> ids;
  for (size_t i = 0; i < n;) {
    ids.push_back(pick_id[i]);
    i += pick_len[i];
  }
  return ids;
}

std::string SubwordVocab::decode(std::span<const int32_t> ids) const {
  std::string out;
  for (int32_t id : ids) {
    if (id < 0 || id >= size()) {
      fail(ErrorKind::invalid_argument, "decode_pieces: id " + std::to_string(id) +
                                            " out of range [0, " + std::to_string(size()) + ")");
    }
    if (id < kNumSpecials) continue;
    out += pieces_[static_cast<size_t>(id)].text;
  }
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::string SubwordVocab::to_text() const {
  std::string out = kHeaderPrefix + std::to_string(size()) + "\n";
  for (const auto& p : pieces_) {
    out += p.text;
    out += '\t';
    out += format_double(p.score);
    out += '\n';
  }
  return out;
}

void SubwordVocab::save(const std::string& path) const { write_file(path, to_text()); }

SubwordVocab SubwordVocab::parse(std::string_view text, const std::string& origin) {
  const auto lines = split_lines(text);
  if (lines.empty() || !lines[0].starts_with(kHeaderPrefix)) {
    fail(ErrorKind::format, origin + ":1: missing '#gibberish-vocab v1' header");
  }
  uint64_t declared = 0;
  if (!parse_uint64(std::string_view(lines[0]).substr(std::string_view(kHeaderPrefix).size()),
                    declared)) {
    fail(ErrorKind::format, origin + ":1: malformed size in header");
  }
  if (declared != lines.size() - 1) {
    fail(ErrorKind::format, origin + ":1: header size " + std::to_string(declared) +
                                " does not match " + std::to_string(lines.size() - 1) +
                                " piece lines");
  }
  if (declared < kNumSpecials) {
    fail(ErrorKind::format, origin + ":1: vocabulary smaller than the 4 specials");
  }

  SubwordVocab vocab;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string at = origin + ":" + std::to_string(i + 1);
    const std::string& line = lines[i];
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      fail(ErrorKind::format, at + ": expected 'piece<TAB>score'");
    }
    std::string piece = line.substr(0, tab);
    if (piece.empty()) fail(ErrorKind::format, at + ": empty piece");
    double score;
    try {
      score = parse_double(std::string_view(line).substr(tab + 1));
    } catch (const Error&) {
      fail(ErrorKind::format, at + ": malformed score");
    }
    vocab.pieces_.push_back({std::move(piece), score});
  }

  for (int32_t id = 0; id < kNumSpecials; ++id) {
    if (vocab.pieces_[static_cast<size_t>(id)].text != kSpecialNames[id]) {
      fail(ErrorKind::format, origin + ":" + std::to_string(id + 2) +
                                  ": specials <pad>, <s>, </s>, <unk> must occupy ids 0..3");
    }
  }
  for (int32_t id = kNumSpecials; id < vocab.size(); ++id) {
    const auto& text_i = vocab.pieces_[static_cast<size_t>(id)].text;
    for (const char* name : kSpecialNames) {
      if (text_i == name) {
        fail(ErrorKind::format, origin + ":" + std::to_string(id + 2) +
                                    ": duplicate piece '" + text_i + "'");
      }
    }
  }

  int32_t singles = 0;
  for (int32_t id = kNumSpecials; id < vocab.size(); ++id) {
    if (utf8_decode(vocab.pieces_[static_cast<size_t>(id)].text).size() == 1) ++singles;
  }
  vocab.alphabet_size_ = singles;

  try {
    vocab.build_index();  // rejects duplicates
  } catch (const Error& e) {
    fail(ErrorKind::format, origin + ": " + e.what());
  }
  return vocab;
}

SubwordVocab SubwordVocab::load(const std::string& path) {
  return parse(read_file(path), path);
}

bool SubwordVocab::operator==(const SubwordVocab& other) const {
  if (pieces_.size() != other.pieces_.size()) return false;
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].text != other.pieces_[i].text) return false;
    if (pieces_[i].score != other.pieces_[i].score) return false;
  }
  return true;
}

}  // namespace sandhi
