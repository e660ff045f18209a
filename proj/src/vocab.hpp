#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sandhi {

// Learned subword inventory over corpus text in which every space has been
// replaced by the `_` marker. Ids are dense; 0..3 are the reserved specials.
// Pieces after the specials start with the single-character alphabet (sorted
// by codepoint) followed by merged units in the order they were learned.
//
// File format: UTF-8, header line `#gibberish-vocab v1 size=<N>`, then one
// `piece<TAB>score` line per id; the specials serialize as `<pad>`, `<s>`,
// `</s>`, `<unk>`.
class SubwordVocab {
 public:
  static constexpr int32_t kPadId = 0;
  static constexpr int32_t kBosId = 1;
  static constexpr int32_t kEosId = 2;
  static constexpr int32_t kUnkId = 3;
  static constexpr int32_t kNumSpecials = 4;
  static constexpr char32_t kSpaceMarker = U'_';

  struct Piece {
    std::string text;  // UTF-8; specials hold their serialized names
    double score;      // log relative frequency in the final segmentation
  };

  // Greedy likelihood-maximizing merge learner. Starting from the observed
  // character alphabet, repeatedly merges the adjacent piece pair (x, y) with
  // the highest count(xy) / (count(x) * count(y)) over the current corpus
  // segmentation until the vocabulary reaches target_size or no pair occurs
  // at least twice. Ties break toward the higher pair count, then the
  // lexicographically smaller merged string, then the smaller (left, right)
  // strings.
  static SubwordVocab learn(std::span<const std::string> lines, uint32_t target_size);

  static SubwordVocab parse(std::string_view text, const std::string& origin);
  static SubwordVocab load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_text() const;

  int32_t size() const { return static_cast<int32_t>(pieces_.size()); }
  int32_t alphabet_size() const { return alphabet_size_; }
  const Piece& piece(int32_t id) const { return pieces_[static_cast<size_t>(id)]; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::optional<int32_t> id_of(std::string_view piece_text) const;

  // Replaces spaces with `_`, then segments by maximum-total-score dynamic
  // programming (ties toward the longer first piece). Out-of-alphabet
  // characters map to one unk id each.
  std::vector<int32_t> encode(std::string_view text) const;

  // Concatenates piece strings (specials contribute nothing) and maps every
  // `_` back to a space. Rejects ids outside [0, size).
  std::string decode(std::span<const int32_t> ids) const;

  bool operator==(const SubwordVocab& other) const;

 private:
  SubwordVocab() = default;
  void build_index();

  std::vector<Piece> pieces_;
  int32_t alphabet_size_ = 0;  // single-codepoint pieces right after the specials
  std::unordered_map<std::u32string, int32_t> index_;  // non-special pieces only
  size_t max_piece_len_ = 0;                           // in codepoints
};

}  // namespace sandhi
