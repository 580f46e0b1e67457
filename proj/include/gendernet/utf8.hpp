#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gendernet {

// A "character" throughout the project is a Unicode scalar value; all text
// I/O is UTF-8. Decoding rejects malformed sequences (overlong forms,
// surrogates, values past U+10FFFF, truncation).
std::vector<char32_t> utf8_decode(std::string_view s);

std::string utf8_encode(std::span<const char32_t> code_points);
void utf8_append(std::string& out, char32_t cp);

// Number of scalar values in s.
std::size_t utf8_length(std::string_view s);

}  // namespace gendernet
