#ifndef CWP_TEXT_H_
#define CWP_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the corpus and annotation code.
namespace cwp::text {

// Decodes one code point starting at s[pos]; advances pos. Invalid bytes
// decode as U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

bool is_unicode_space(char32_t cp);
bool is_punctuation(char32_t cp);

// Splits on any Unicode whitespace; empty pieces are dropped.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

// ASCII lowercase plus apostrophe folding (U+2019 -> '). Non-ASCII letters
// pass through unchanged.
std::string fold(std::string_view s);

// Splits on a single byte separator; keeps empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

// Splits a buffer into lines on '\n'. A trailing '\r' is not stripped.
// A final newline does not produce an empty trailing line.
std::vector<std::string_view> lines(std::string_view s);

bool starts_with_upper(std::string_view token);

// Whitespace split with leading/trailing punctuation stripped from each
// piece; pieces left empty are dropped.
std::vector<std::string> tokenize_words(std::string_view s);

// RFC 4180 quoting when the field holds a comma, quote, CR or LF.
std::string csv_field(std::string_view field);

// printf-style "%.*g" with the given significant digits.
std::string format_number(double value, int digits = 9);

// Strips leading and trailing punctuation code points.
std::string_view strip_punctuation(std::string_view token);

}  // namespace cwp::text

#endif  // CWP_TEXT_H_
