#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sandhi {

// UTF-8 <-> codepoint conversion. Decoding rejects malformed sequences,
// overlong encodings and surrogates.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view codepoints);
std::string utf8_encode_char(char32_t cp);

// Splits on single ASCII spaces, dropping empty tokens.
std::vector<std::string> split_words(std::string_view text);
std::string join_words(std::span<const std::string> words);

// Splits into lines on LF. A trailing LF does not produce an empty last line.
std::vector<std::string> split_lines(std::string_view text);

// Whole-file IO in binary mode (no newline translation).
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
std::vector<std::string> read_lines(const std::string& path);

// Shortest round-trip decimal rendering (via std::to_chars) and its inverse.
std::string format_double(double value);
double parse_double(std::string_view text);

bool parse_uint64(std::string_view text, uint64_t& out);

}  // namespace sandhi
