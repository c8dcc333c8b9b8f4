#pragma once

// UTF-8 decode/encode plus the character classes shared by the tokenizer,
// normalizer and edit classifier. Case folding is a simplified table covering
// ASCII, Latin-1, Latin Extended-A and Cyrillic; that is enough for the
// languages this toolkit targets and keeps behaviour identical across
// platforms and locales.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gectk/errors.hpp"

namespace gectk {

inline void append_utf8(std::string& out, char32_t cp) {
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
}

inline std::string encode_utf8(const std::u32string& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

// strict decoder: rejects truncated sequences, overlong encodings,
// surrogates and values above U+10FFFF
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw Utf8Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size())
      throw Utf8Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80)
        throw Utf8Error("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    static const char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < kMin[len])
      throw Utf8Error("overlong UTF-8 encoding at offset " + std::to_string(i));
    if (cp >= 0xD800 && cp <= 0xDFFF)
      throw Utf8Error("UTF-8 encoded surrogate at offset " + std::to_string(i));
    if (cp > 0x10FFFF)
      throw Utf8Error("code point out of range at offset " + std::to_string(i));
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline bool valid_utf8(std::string_view s) {
  try {
    decode_utf8(s);
    return true;
  } catch (const Utf8Error&) {
    return false;
  }
}

inline bool is_space_cp(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// C0 controls that are not whitespace; these never belong in corpus text
inline bool is_forbidden_control(char32_t cp) {
  return cp < 0x20 && !is_space_cp(cp);
}

// punctuation that is always split into its own token
inline bool is_split_punct(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'"': case U'\'': case U'(': case U')':
    case 0x00AB:  // «
    case 0x00BB:  // »
    case 0x201E:  // „
    case 0x201C:  // “
    case 0x201D:  // ”
    case 0x2014:  // —
    case 0x2026:  // …
      return true;
    default:
      return false;
  }
}

// wider punctuation class used when classifying whole tokens
inline bool is_punct_cp(char32_t cp) {
  if (is_split_punct(cp)) return true;
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2015:
    case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x201F:
    case 0x2022: case 0x2032: case 0x2033: case 0x2212:
    case 0x00B4: case 0x00A1: case 0x00BF: case 0x00B7:
      return true;
    default:
      return false;
  }
}

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }
inline bool is_ascii_alpha(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

// word constituent: ASCII alphanumerics plus any non-space, non-punctuation
// code point outside ASCII (letters of other scripts, digits, etc.)
inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return is_ascii_alpha(cp) || is_ascii_digit(cp);
  return !is_space_cp(cp) && !is_punct_cp(cp);
}

inline bool is_letter_cp(char32_t cp) {
  if (cp < 0x80) return is_ascii_alpha(cp);
  return is_word_cp(cp);
}

inline char32_t to_lower_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) return cp + 0x20;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x139 && cp <= 0x148) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;   // Cyrillic А..Я
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;   // Ѐ..Џ incl. Є І Ї
  return cp;
}

inline char32_t to_upper_cp(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return cp - 0x20;
  if ((cp >= 0xE0 && cp <= 0xF6) || (cp >= 0xF8 && cp <= 0xFE)) return cp - 0x20;
  if ((cp >= 0x101 && cp <= 0x138) || (cp >= 0x14B && cp <= 0x178)) {
    return (cp % 2 == 1) ? cp - 1 : cp;
  }
  if (cp >= 0x13A && cp <= 0x149) {
    return (cp % 2 == 0) ? cp - 1 : cp;
  }
  if (cp == 0xFF) return 0x178;
  if (cp == 0x17A || cp == 0x17C || cp == 0x17E) return cp - 1;
  if (cp >= 0x430 && cp <= 0x44F) return cp - 0x20;
  if (cp >= 0x450 && cp <= 0x45F) return cp - 0x50;
  return cp;
}

inline bool is_upper_cp(char32_t cp) { return to_lower_cp(cp) != cp; }
inline bool is_lower_cp(char32_t cp) { return to_upper_cp(cp) != cp; }

inline std::u32string fold_case(const std::u32string& s) {
  std::u32string out(s);
  for (char32_t& cp : out) cp = to_lower_cp(cp);
  return out;
}

inline std::string fold_case_utf8(std::string_view s) {
  return encode_utf8(fold_case(decode_utf8(s)));
}

// true if a and b are equal after case folding but not byte-equal
inline bool case_only_difference(std::string_view a, std::string_view b) {
  if (a == b) return false;
  return fold_case_utf8(a) == fold_case_utf8(b);
}

inline bool is_punct_token(std::string_view tok) {
  if (tok.empty()) return false;
  for (char32_t cp : decode_utf8(tok))
    if (!is_punct_cp(cp)) return false;
  return true;
}

inline bool has_letter(std::string_view tok) {
  for (char32_t cp : decode_utf8(tok))
    if (is_letter_cp(cp)) return true;
  return false;
}

}  // namespace gectk
