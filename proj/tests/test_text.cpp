#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "error.hpp"
#include "text.hpp"

using namespace sandhi;

TEST_CASE("utf8 round trip for ascii and IAST") {
  for (std::string s : {"", "abc", "rāma iti", "gaṅgā", "paśyati", "a\tb\nc"}) {
    CHECK(utf8_encode(utf8_decode(s)) == s);
  }
  const std::u32string u = utf8_decode("rāmaḥ");
  CHECK(u.size() == 5);
  CHECK(u[1] == U'ā');  // ā
  CHECK(u[4] == U'ḥ');  // ḥ
}

TEST_CASE("utf8 decode rejects malformed input") {
  CHECK_THROWS_AS(utf8_decode(std::string("\xC4", 1)), Error);          // truncated
  CHECK_THROWS_AS(utf8_decode(std::string("\xC4\x41", 2)), Error);      // bad continuation
  CHECK_THROWS_AS(utf8_decode(std::string("\xFF", 1)), Error);          // invalid lead
  CHECK_THROWS_AS(utf8_decode(std::string("\xC0\x80", 2)), Error);      // overlong
  CHECK_THROWS_AS(utf8_decode(std::string("\xED\xA0\x80", 3)), Error);  // surrogate
}

TEST_CASE("split_words drops empty tokens") {
  CHECK(split_words("a b") == std::vector<std::string>{"a", "b"});
  CHECK(split_words("a  b") == std::vector<std::string>{"a", "b"});
  CHECK(split_words(" a b ") == std::vector<std::string>{"a", "b"});
  CHECK(split_words("") == std::vector<std::string>{});
  CHECK(split_words("   ") == std::vector<std::string>{});
}

TEST_CASE("split_lines handles trailing newline") {
  CHECK(split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
  CHECK(split_lines("a\nb") == std::vector<std::string>{"a", "b"});
  CHECK(split_lines("") == std::vector<std::string>{});
  CHECK(split_lines("\n") == std::vector<std::string>{""});
}

TEST_CASE("format_double round trips exactly") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 3.141592653589793, -2.2250738585072014e-308,
                   1.7976931348623157e308}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(parse_double(format_double(-inf)) == -inf);
  CHECK_THROWS_AS(parse_double("12x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}
