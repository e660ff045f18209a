#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "error.hpp"
#include "rng.hpp"
#include "test_util.hpp"
#include "text.hpp"
#include "vocab.hpp"

using namespace sandhi;

namespace {

// Brute-force merge oracle: string segmentations, recounting every adjacent
// pair from scratch at every step. Kept independent of the implementation.
std::vector<std::string> oracle_merges(const std::vector<std::string>& lines,
                                       size_t max_merges) {
  std::vector<std::vector<std::u32string>> seg;
  for (const auto& line : lines) {
    std::u32string u = utf8_decode(line);
    std::replace(u.begin(), u.end(), U' ', U'_');
    if (u.empty()) continue;
    std::vector<std::u32string> pieces;
    for (char32_t cp : u) pieces.emplace_back(1, cp);
    seg.push_back(std::move(pieces));
  }

  std::vector<std::string> merges;
  for (size_t step = 0; step < max_merges; ++step) {
    std::map<std::u32string, int64_t> count;
    std::map<std::pair<std::u32string, std::u32string>, int64_t> pair_count;
    for (const auto& pieces : seg) {
      for (size_t k = 0; k < pieces.size(); ++k) {
        ++count[pieces[k]];
        if (k + 1 < pieces.size()) ++pair_count[{pieces[k], pieces[k + 1]}];
      }
    }

    bool found = false;
    std::pair<std::u32string, std::u32string> best_pair;
    double best_score = 0.0;
    int64_t best_count = 0;
    std::u32string best_merged;
    for (const auto& [pr, pc] : pair_count) {
      if (pc < 2) continue;
      const double score = static_cast<double>(pc) /
                           (static_cast<double>(count[pr.first]) *
                            static_cast<double>(count[pr.second]));
      const std::u32string merged = pr.first + pr.second;
      bool better = false;
      if (!found) {
        better = true;
      } else if (score != best_score) {
        better = score > best_score;
      } else if (pc != best_count) {
        better = pc > best_count;
      } else if (merged != best_merged) {
        better = merged < best_merged;
      } else {
        better = pr < best_pair;
      }
      if (better) {
        found = true;
        best_pair = pr;
        best_score = score;
        best_count = pc;
        best_merged = merged;
      }
    }
    if (!found) break;

    for (auto& pieces : seg) {
      std::vector<std::u32string> next;
      for (size_t k = 0; k < pieces.size();) {
        if (k + 1 < pieces.size() && pieces[k] == best_pair.first &&
            pieces[k + 1] == best_pair.second) {
          next.push_back(best_merged);
          k += 2;
        } else {
          next.push_back(pieces[k]);
          k += 1;
        }
      }
      pieces = std::move(next);
    }
    const std::string merged_u8 = utf8_encode(best_merged);
    if (std::find(merges.begin(), merges.end(), merged_u8) == merges.end()) {
      merges.push_back(merged_u8);
    }
  }
  return merges;
}

// Merged pieces in learn order are exactly the pieces after the specials and
// the single-character alphabet.
std::vector<std::string> learned_merges(const SubwordVocab& vocab) {
  std::vector<std::string> merges;
  for (int32_t id = SubwordVocab::kNumSpecials; id < vocab.size(); ++id) {
    if (utf8_decode(vocab.piece(id).text).size() > 1) merges.push_back(vocab.piece(id).text);
  }
  return merges;
}

size_t alphabet_size_of(const std::vector<std::string>& lines) {
  std::set<char32_t> alpha;
  for (const auto& line : lines) {
    std::u32string u = utf8_decode(line);
    std::replace(u.begin(), u.end(), U' ', U'_');
    alpha.insert(u.begin(), u.end());
  }
  return alpha.size();
}

std::vector<int32_t> encode_ids(const SubwordVocab& v, std::string_view text) {
  return v.encode(text);
}

}  // namespace

TEST_CASE("zero merge budget keeps the bare alphabet") {
  const std::vector<std::string> lines{"ab ab"};
  const auto vocab = SubwordVocab::learn(lines, 4 + 3);
  REQUIRE(vocab.size() == 7);
  CHECK(vocab.piece(0).text == "<pad>");
  CHECK(vocab.piece(1).text == "<s>");
  CHECK(vocab.piece(2).text == "</s>");
  CHECK(vocab.piece(3).text == "<unk>");
  // alphabet sorted by codepoint: '_' < 'a' < 'b'
  CHECK(vocab.piece(4).text == "_");
  CHECK(vocab.piece(5).text == "a");
  CHECK(vocab.piece(6).text == "b");
}

TEST_CASE("first merge on 'ab ab' is (a,b) by the count tie-break") {
  // pairs: (a,b) count 2, score 2/(2*2) = 0.5; (b,_) 1/(2*1) = 0.5;
  // (_,a) 1/(1*2) = 0.5 -> tie broken by the higher pair count.
  const std::vector<std::string> lines{"ab ab"};
  const auto vocab = SubwordVocab::learn(lines, 4 + 3 + 1);
  REQUIRE(vocab.size() == 8);
  CHECK(vocab.piece(7).text == "ab");
  // final segmentation [ab, _, ab]: scores are log relative frequencies
  CHECK(vocab.piece(7).score == doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-12));
  CHECK(vocab.piece(4).score == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
  // 'a' and 'b' no longer occur on their own
  CHECK(vocab.piece(5).score == -std::numeric_limits<double>::infinity());
  CHECK(vocab.piece(6).score == -std::numeric_limits<double>::infinity());
}

TEST_CASE("learning is deterministic") {
  const std::vector<std::string> lines{"rāmeti ca", "rāma iti ca", "cāpi ceti"};
  const auto a = SubwordVocab::learn(lines, 40);
  const auto b = SubwordVocab::learn(lines, 40);
  CHECK(a == b);
}

TEST_CASE("learn validation errors") {
  CHECK_THROWS_AS(SubwordVocab::learn({}, 100), Error);
  const std::vector<std::string> empties{"", ""};
  CHECK_THROWS_AS(SubwordVocab::learn(empties, 100), Error);
  const std::vector<std::string> lines{"ab ab"};
  CHECK_THROWS_AS(SubwordVocab::learn(lines, 6), Error);  // below alphabet + specials
}

TEST_CASE("merges stop when no pair occurs twice") {
  const std::vector<std::string> lines{"abab"};
  const auto vocab = SubwordVocab::learn(lines, 64);
  // (a,b) merges; afterwards the only pair (ab,ab) is a singleton
  REQUIRE(vocab.size() == 7);
  CHECK(vocab.piece(6).text == "ab");
  CHECK(vocab.piece(6).score == doctest::Approx(0.0));  // log(2/2)
}

TEST_CASE("encode uses maximum-score segmentation") {
  const std::vector<std::string> lines{"ab ab"};
  const auto vocab = SubwordVocab::learn(lines, 4 + 3 + 1);
  const auto ab = vocab.id_of("ab");
  const auto us = vocab.id_of("_");
  REQUIRE(ab.has_value());
  REQUIRE(us.has_value());
  CHECK(encode_ids(vocab, "ab ab") == std::vector<int32_t>{*ab, *us, *ab});
  CHECK(encode_ids(vocab, "") == std::vector<int32_t>{});
}

TEST_CASE("out-of-alphabet characters map to one unk each") {
  const std::vector<std::string> lines{"ab ab"};
  const auto vocab = SubwordVocab::learn(lines, 4 + 3 + 1);
  const auto a = vocab.id_of("a");
  const auto b = vocab.id_of("b");
  CHECK(encode_ids(vocab, "aXb") ==
        std::vector<int32_t>{*a, SubwordVocab::kUnkId, *b});
  CHECK(encode_ids(vocab, "XY") ==
        std::vector<int32_t>{SubwordVocab::kUnkId, SubwordVocab::kUnkId});
  // multi-byte out-of-alphabet characters still cost exactly one unk
  CHECK(encode_ids(vocab, "aṛb") ==
        std::vector<int32_t>{*a, SubwordVocab::kUnkId, *b});
}

TEST_CASE("encode ties break toward the longer first piece") {
  const std::string text =
      "#gibberish-vocab v1 size=7\n"
      "<pad>\t0\n<s>\t0\n</s>\t0\n<unk>\t0\n"
      "a\t-1\n"
      "b\t-1\n"
      "ab\t-2\n";
  const auto vocab = SubwordVocab::parse(text, "inline");
  CHECK(encode_ids(vocab, "ab") == std::vector<int32_t>{6});
  // position 1 ties again: a + (a b) vs a + (ab)
  CHECK(encode_ids(vocab, "aab") == std::vector<int32_t>{4, 6});
}

TEST_CASE("decode inverts encode and reclaims spaces") {
  const std::vector<std::string> lines{"ab ab"};
  const auto vocab = SubwordVocab::learn(lines, 4 + 3 + 1);
  CHECK(vocab.decode(encode_ids(vocab, "ab ab")) == "ab ab");
  CHECK(vocab.decode(std::vector<int32_t>{}) == "");
  const auto a = vocab.id_of("a");
  const auto us = vocab.id_of("_");
  // marker substitution is 1:1, double spaces survive
  CHECK(vocab.decode(std::vector<int32_t>{*a, *us, *us, *vocab.id_of("b")}) == "a  b");
  // specials contribute nothing
  CHECK(vocab.decode(std::vector<int32_t>{SubwordVocab::kBosId, *a,
                                          SubwordVocab::kEosId}) == "a");
  CHECK_THROWS_AS(vocab.decode(std::vector<int32_t>{99}), Error);
  CHECK_THROWS_AS(vocab.decode(std::vector<int32_t>{-1}), Error);
}

TEST_CASE("round trip is lossless over the training alphabet") {
  const std::vector<std::string> lines{"rāmeti ca gacchati", "senāpi vanam", "ityatra guruḥ"};
  const auto vocab = SubwordVocab::learn(lines, 60);

  // characters of the training corpus, with the marker swapped back to space
  std::u32string alphabet;
  for (const auto& line : lines) {
    for (char32_t cp : utf8_decode(line)) {
      if (alphabet.find(cp) == std::u32string::npos) alphabet.push_back(cp);
    }
  }
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string s;
    const size_t len = rng.uniform_int(0, 30);
    for (size_t i = 0; i < len; ++i) {
      s.push_back(alphabet[rng.uniform_int(0, alphabet.size() - 1)]);
    }
    const std::string text = utf8_encode(s);
    CHECK(vocab.decode(vocab.encode(text)) == text);
    CHECK(vocab.encode(text).size() <= s.size());  // merges never lengthen
  }
}

TEST_CASE("merge sequence equals the brute-force oracle") {
  // exhaustive kernel: every 1..2-line corpus over short {a,b} strings
  std::vector<std::string> pool;
  for (const std::string s : {"a", "b", "ab", "ba", "aa", "abab", "aab b", "a ba"}) {
    pool.push_back(s);
  }
  for (size_t i = 0; i < pool.size(); ++i) {
    for (size_t j = 0; j <= pool.size(); ++j) {
      std::vector<std::string> lines{pool[i]};
      if (j < pool.size()) lines.push_back(pool[j]);
      const size_t alpha = alphabet_size_of(lines);
      const auto vocab = SubwordVocab::learn(lines, 4 + alpha + 6);
      CHECK(learned_merges(vocab) == oracle_merges(lines, 6));
    }
  }

  // randomized corpora over a <= 4 character alphabet (incl. the marker)
  Rng rng(7);
  const std::u32string alpha = U"abc ";
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<std::string> lines;
    const size_t n_lines = rng.uniform_int(1, 5);
    for (size_t l = 0; l < n_lines; ++l) {
      std::u32string s;
      const size_t len = rng.uniform_int(1, 12);
      for (size_t k = 0; k < len; ++k) s.push_back(alpha[rng.uniform_int(0, 3)]);
      lines.push_back(utf8_encode(s));
    }
    const size_t a = alphabet_size_of(lines);
    const auto vocab = SubwordVocab::learn(lines, 4 + a + 6);
    CHECK(learned_merges(vocab) == oracle_merges(lines, 6));
  }
}

TEST_CASE("vocab file round trip is exact") {
  const std::vector<std::string> lines{"rāmeti ca", "abab", "senāpi"};
  const auto vocab = SubwordVocab::learn(lines, 50);
  testutil::TempDir tmp;
  vocab.save(tmp.file("v.vocab"));
  const auto loaded = SubwordVocab::load(tmp.file("v.vocab"));
  CHECK(loaded == vocab);
  // rewriting produces identical bytes
  loaded.save(tmp.file("v2.vocab"));
  CHECK(read_file(tmp.file("v.vocab")) == read_file(tmp.file("v2.vocab")));
}

TEST_CASE("vocab file format errors name the line") {
  testutil::TempDir tmp;
  auto parse_text = [](const std::string& text) {
    return SubwordVocab::parse(text, "v");
  };
  const std::string specials = "<pad>\t0\n<s>\t0\n</s>\t0\n<unk>\t0\n";

  CHECK_THROWS_WITH_AS(parse_text("a\t0\n"), doctest::Contains("header"), Error);
  CHECK_THROWS_WITH_AS(parse_text("#gibberish-vocab v1 size=5\n" + specials),
                       doctest::Contains("v:1"), Error);  // size mismatch
  CHECK_THROWS_WITH_AS(
      parse_text("#gibberish-vocab v1 size=5\n" + specials + "a\n"),
      doctest::Contains("v:6"), Error);  // missing score
  CHECK_THROWS_WITH_AS(
      parse_text("#gibberish-vocab v1 size=5\n" + specials + "a\tx\n"),
      doctest::Contains("score"), Error);
  CHECK_THROWS_WITH_AS(
      parse_text("#gibberish-vocab v1 size=6\n" + specials + "a\t0\na\t0\n"),
      doctest::Contains("duplicate"), Error);
  // specials must sit at ids 0..3
  CHECK_THROWS_WITH_AS(
      parse_text("#gibberish-vocab v1 size=5\n<pad>\t0\n<s>\t0\n</s>\t0\na\t0\n<unk>\t0\n"),
      doctest::Contains("specials"), Error);
}

TEST_CASE("scores with -inf round trip through the file") {
  const std::vector<std::string> lines{"abab"};
  const auto vocab = SubwordVocab::learn(lines, 64);
  CHECK(vocab.piece(4).score == -std::numeric_limits<double>::infinity());
  testutil::TempDir tmp;
  vocab.save(tmp.file("v.vocab"));
  CHECK(SubwordVocab::load(tmp.file("v.vocab")) == vocab);
}

TEST_CASE("realized decoder pieces are a subset of the shared vocabulary") {
  const std::vector<std::string> src{"rāmeti", "cāpi ceti", "devota"};
  const std::vector<std::string> tgt{"rāma iti", "ca api ca iti", "deva uta"};
  std::vector<std::string> all;
  for (size_t i = 0; i < src.size(); ++i) {
    all.push_back(src[i]);
    all.push_back(tgt[i]);
  }
  const auto vocab = SubwordVocab::learn(all, 64);
  std::set<int32_t> decoder_realized;
  for (const auto& line : tgt) {
    for (int32_t id : vocab.encode(line)) decoder_realized.insert(id);
  }
  for (int32_t id : decoder_realized) {
    CHECK(id >= SubwordVocab::kNumSpecials);
    CHECK(id < vocab.size());
  }
  CHECK(decoder_realized.size() < static_cast<size_t>(vocab.size()));
}
