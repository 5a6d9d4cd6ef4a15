#include "etrig/utf8.hpp"

#include "etrig/errors.hpp"

namespace etrig {

namespace {

// Decodes one scalar starting at s[pos]; advances pos past it.
char32_t decode_next(std::string_view s, size_t& pos) {
  const auto byte = [&](size_t i) -> unsigned char {
    return static_cast<unsigned char>(s[i]);
  };
  unsigned char b0 = byte(pos);
  size_t need;
  char32_t cp;
  if (b0 < 0x80) {
    need = 0;
    cp = b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    throw ParseError("invalid UTF-8 lead byte at offset " + std::to_string(pos));
  }
  for (size_t i = 1; i <= need; ++i) {
    if (pos + i >= s.size()) {
      throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(pos));
    }
    unsigned char bi = byte(pos + i);
    if ((bi & 0xC0) != 0x80) {
      throw ParseError("invalid UTF-8 continuation byte at offset " +
                       std::to_string(pos + i));
    }
    cp = (cp << 6) | (bi & 0x3F);
  }
  // Reject overlong encodings and surrogate range.
  static constexpr char32_t kMin[4] = {0, 0x80, 0x800, 0x10000};
  if (cp < kMin[need] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    throw ParseError("invalid UTF-8 scalar at offset " + std::to_string(pos));
  }
  pos += need + 1;
  return cp;
}

}  // namespace

std::vector<std::string> utf8_split(std::string_view s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t start = pos;
    decode_next(s, pos);
    out.emplace_back(s.substr(start, pos - start));
  }
  return out;
}

size_t utf8_length(std::string_view s) {
  size_t n = 0, pos = 0;
  while (pos < s.size()) {
    decode_next(s, pos);
    ++n;
  }
  return n;
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

}  // namespace etrig
