#pragma once

// Token sequences, tokenization, text normalization and corpus handling.
//
// Tokenization rule table (fixed; spans in edit files depend on it):
//   * input is split on whitespace (TAB/LF/CR count as whitespace, the
//     remaining C0 controls raise ControlCharacterError)
//   * these code points always form single-character tokens:
//       . , ; : ! ? " ' ( ) « » „ “ ” — …
//   * '-' stays inside a token when both raw neighbours are word characters
//     ("well-known", "3-4"), otherwise it forms its own token
//   * everything else accumulates into word tokens
//
// Each token records whether a space preceded it, so detokenize() rebuilds
// whitespace-normalized input byte for byte.
//
// normalize() mapping table (idempotent):
//   * whitespace runs (incl. NBSP and friends) collapse to one ASCII space,
//     leading/trailing whitespace is dropped
//   * „ “ ” ‟ « » ″  ->  "
//   * ‘ ’ ‚ ‛ ′ ´ `  ->  '
//   * – — ‒ ― −      ->  -

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gectk/errors.hpp"
#include "gectk/rng.hpp"
#include "gectk/unicode.hpp"

namespace gectk {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> space_before;  // parallel to tokens

  bool operator==(const TokenSequence&) const = default;
  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

inline std::string detokenize(const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.space_before[i]) out.push_back(' ');
    out += seq.tokens[i];
  }
  return out;
}

inline TokenSequence tokenize(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  for (char32_t cp : cps)
    if (is_forbidden_control(cp))
      throw ControlCharacterError("control character U+" + hex64(cp).substr(12) +
                                  " in text");
  TokenSequence seq;
  std::u32string current;
  bool current_spaced = false;
  bool saw_space = false;
  auto flush = [&]() {
    if (!current.empty()) {
      seq.tokens.push_back(encode_utf8(current));
      seq.space_before.push_back(current_spaced ? 1 : 0);
      current.clear();
    }
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t cp = cps[i];
    if (is_space_cp(cp)) {
      flush();
      saw_space = true;
      continue;
    }
    bool own_token = is_split_punct(cp);
    if (cp == U'-') {
      bool prev_word = i > 0 && is_word_cp(cps[i - 1]);
      bool next_word = i + 1 < cps.size() && is_word_cp(cps[i + 1]);
      own_token = !(prev_word && next_word);
    }
    if (own_token) {
      flush();
      seq.tokens.push_back(encode_utf8(std::u32string(1, cp)));
      seq.space_before.push_back(saw_space ? 1 : 0);
      saw_space = false;
    } else {
      if (current.empty()) {
        current_spaced = saw_space;
        saw_space = false;
      }
      current.push_back(cp);
    }
  }
  flush();
  if (!seq.space_before.empty()) seq.space_before[0] = 0;
  return seq;
}

inline std::string normalize(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  bool at_start = true;
  for (char32_t cp : cps) {
    switch (cp) {
      case 0x201E: case 0x201C: case 0x201D: case 0x201F:
      case 0x00AB: case 0x00BB: case 0x2033:
        cp = U'"';
        break;
      case 0x2018: case 0x2019: case 0x201A: case 0x201B:
      case 0x2032: case 0x00B4: case 0x60:
        cp = U'\'';
        break;
      case 0x2013: case 0x2014: case 0x2012: case 0x2015: case 0x2212:
        cp = U'-';
        break;
      default:
        break;
    }
    if (is_space_cp(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !at_start) out.push_back(' ');
    pending_space = false;
    at_start = false;
    append_utf8(out, cp);
  }
  return out;
}

// single-space join / split used by the edit file format
inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

inline std::vector<std::string> split_tokens(std::string_view joined) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= joined.size()) {
    std::size_t next = joined.find(' ', pos);
    if (next == std::string_view::npos) {
      if (pos < joined.size()) out.emplace_back(joined.substr(pos));
      break;
    }
    if (next > pos) out.emplace_back(joined.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

inline TokenSequence from_pretokenized(std::string_view line) {
  TokenSequence seq;
  seq.tokens = split_tokens(line);
  seq.space_before.assign(seq.tokens.size(), 1);
  if (!seq.space_before.empty()) seq.space_before[0] = 0;
  return seq;
}

struct Corpus {
  std::vector<std::string> lines;  // one sentence per line, no empties
  std::string origin;              // where it came from, for messages

  std::size_t size() const { return lines.size(); }
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// splits on LF, tolerates a trailing CR per line, drops empty lines
inline Corpus corpus_from_text(std::string_view text, std::string origin) {
  if (!valid_utf8(text))
    throw Utf8Error("invalid UTF-8 in " + origin);
  Corpus c;
  c.origin = std::move(origin);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find('\n', pos);
    std::string_view line = (next == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) c.lines.emplace_back(line);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return c;
}

inline Corpus load_corpus(const std::filesystem::path& path) {
  return corpus_from_text(read_file(path), path.string());
}

inline void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  std::string out;
  for (const std::string& line : c.lines) {
    out += line;
    out.push_back('\n');
  }
  write_file(path, out);
}

// uniform sample without replacement; every line gets a key from (seed, line
// index) and the n smallest keys win, so the result is independent of
// traversal order
inline Corpus sample_corpus(const Corpus& c, std::size_t n, std::uint64_t seed) {
  if (n > c.lines.size())
    throw SampleTooLarge("requested " + std::to_string(n) + " of " +
                         std::to_string(c.lines.size()) + " lines");
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(c.lines.size());
  for (std::size_t i = 0; i < c.lines.size(); ++i)
    keyed[i] = {mix64(seed, i), i};
  std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(n),
                   keyed.end());
  keyed.resize(n);
  std::sort(keyed.begin(), keyed.end());
  Corpus out;
  out.origin = c.origin;
  out.lines.reserve(n);
  for (const auto& [key, idx] : keyed) out.lines.push_back(c.lines[idx]);
  return out;
}

// two-column TSV: errorful source, TAB, corrected target
struct ParallelCorpus {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string origin;

  std::size_t size() const { return pairs.size(); }
};

inline ParallelCorpus parallel_from_text(std::string_view text, std::string origin) {
  if (!valid_utf8(text))
    throw Utf8Error("invalid UTF-8 in " + origin);
  ParallelCorpus c;
  c.origin = std::move(origin);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find('\n', pos);
    std::string_view line = (next == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, next - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos)
        throw FormatError("expected two TAB-separated columns", line_no);
      if (line.find('\t', tab + 1) != std::string_view::npos)
        throw FormatError("more than two columns", line_no);
      c.pairs.emplace_back(std::string(line.substr(0, tab)),
                           std::string(line.substr(tab + 1)));
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return c;
}

inline ParallelCorpus load_parallel(const std::filesystem::path& path) {
  return parallel_from_text(read_file(path), path.string());
}

inline void save_parallel(const ParallelCorpus& c, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [src, tgt] : c.pairs) {
    out += src;
    out.push_back('\t');
    out += tgt;
    out.push_back('\n');
  }
  write_file(path, out);
}

}  // namespace gectk
