#ifndef ETRIG_UTF8_HPP
#define ETRIG_UTF8_HPP

#include <string>
#include <string_view>
#include <vector>

namespace etrig {

// Splits a UTF-8 string into one std::string per unicode scalar value.
// Throws ParseError on malformed byte sequences.
std::vector<std::string> utf8_split(std::string_view s);

// Number of unicode scalars in s; throws ParseError on malformed input.
size_t utf8_length(std::string_view s);

// Encodes a single code point as UTF-8.
std::string utf8_encode(char32_t cp);

}  // namespace etrig

#endif  // ETRIG_UTF8_HPP
