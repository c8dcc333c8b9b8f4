#pragma once

// Error category labels for edits, and the lexicon they can draw on.
//
// A label is prefix + suffix. The prefix comes from the edit shape:
//   M (missing, the edit inserts), U (unnecessary, the edit deletes),
//   R (replacement). The suffix is decided by the first matching rule:
//   1. every affected token is punctuation            -> PUNCT
//   2. replacement equal up to letter case            -> CASE
//   3. replacement, same token multiset, >= 2 tokens  -> WO
//   4. single-token replacement, source not in the lexicon, correction in it,
//      character distance <= 2                        -> SPELL
//   5. single-token replacement, both sides in the lexicon with a shared
//      lemma: noun -> NOM:FORM, verb -> VERB:FORM
//   6. any affected token has a letter                -> LEX
//   7. otherwise                                      -> OTHER
// Rules 4 and 5 only fire when a lexicon is supplied.
//
// Lexicon file: one "surface TAB lemma TAB pos" entry per line; pos is a
// free-form tag, "noun"/"verb" (any case, UD tags NOUN/VERB included) is what
// rule 5 looks at. Load order never changes labels.

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gectk/editdist.hpp"
#include "gectk/errors.hpp"
#include "gectk/m2.hpp"
#include "gectk/text.hpp"
#include "gectk/unicode.hpp"

namespace gectk {

struct LexEntry {
  std::string lemma;
  std::string pos;

  bool operator==(const LexEntry&) const = default;
};

class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon from_text(std::string_view text, std::string origin) {
    if (!valid_utf8(text)) throw Utf8Error("invalid UTF-8 in " + origin);
    Lexicon lex;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
      std::size_t next = text.find('\n', pos);
      std::string_view line = (next == std::string_view::npos)
                                  ? text.substr(pos)
                                  : text.substr(pos, next - pos);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) {
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos)
          throw FormatError("expected 'surface TAB lemma TAB pos'", line_no);
        lex.add(std::string(line.substr(0, t1)),
                std::string(line.substr(t1 + 1, t2 - t1 - 1)),
                std::string(line.substr(t2 + 1)));
      }
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return lex;
  }

  static Lexicon load(const std::filesystem::path& path) {
    return from_text(read_file(path), path.string());
  }

  void add(std::string surface, std::string lemma, std::string pos) {
    auto& entries = entries_[std::move(surface)];
    LexEntry e{std::move(lemma), std::move(pos)};
    if (std::find(entries.begin(), entries.end(), e) == entries.end())
      entries.push_back(std::move(e));
  }

  bool contains(const std::string& surface) const {
    return entries_.count(surface) != 0;
  }

  const std::vector<LexEntry>* entries(const std::string& surface) const {
    auto it = entries_.find(surface);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<LexEntry>> entries_;
};

namespace detail {

inline bool pos_is(const std::string& pos, std::string_view want) {
  std::string low;
  low.reserve(pos.size());
  for (char c : pos) low.push_back(c >= 'A' && c <= 'Z' ? char(c + 32) : c);
  return low == want;
}

// checks every (source entry, correction entry) pair; order-independent
inline bool shares_lemma_with_pos(const Lexicon& lex, const std::string& a,
                                  const std::string& b, std::string_view pos) {
  const auto* ea = lex.entries(a);
  const auto* eb = lex.entries(b);
  if (!ea || !eb) return false;
  for (const LexEntry& x : *ea)
    for (const LexEntry& y : *eb)
      if (x.lemma == y.lemma && pos_is(x.pos, pos) && pos_is(y.pos, pos))
        return true;
  return false;
}

inline bool multiset_equal(std::vector<std::string> a, std::vector<std::string> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace detail

inline std::string classify_edit(const Edit& edit, const TokenSequence& source,
                                 const Lexicon* lexicon = nullptr) {
  std::vector<std::string> src_toks(
      source.tokens.begin() + edit.start, source.tokens.begin() + edit.end);
  std::vector<std::string> cor_toks = edit.correction_tokens();

  const char* prefix = edit.is_insertion() ? "M" : edit.is_deletion() ? "U" : "R";
  bool replacement = !edit.is_insertion() && !edit.is_deletion();

  auto all_punct = [](const std::vector<std::string>& toks) {
    for (const std::string& t : toks)
      if (!is_punct_token(t)) return false;
    return true;
  };
  auto any_letter = [](const std::vector<std::string>& toks) {
    for (const std::string& t : toks)
      if (has_letter(t)) return true;
    return false;
  };

  std::string suffix;
  std::string src_joined = join_tokens(src_toks);
  if (all_punct(src_toks) && all_punct(cor_toks) &&
      !(src_toks.empty() && cor_toks.empty())) {
    suffix = "PUNCT";
  } else if (replacement && case_only_difference(src_joined, edit.correction)) {
    suffix = "CASE";
  } else if (replacement && src_toks.size() >= 2 && cor_toks.size() >= 2 &&
             detail::multiset_equal(src_toks, cor_toks)) {
    suffix = "WO";
  } else if (replacement && lexicon && src_toks.size() == 1 &&
             cor_toks.size() == 1 && !lexicon->contains(src_toks[0]) &&
             lexicon->contains(cor_toks[0]) &&
             osa_distance_utf8(src_toks[0], cor_toks[0], 2) <= 2) {
    suffix = "SPELL";
  } else if (replacement && lexicon && src_toks.size() == 1 &&
             cor_toks.size() == 1 &&
             detail::shares_lemma_with_pos(*lexicon, src_toks[0], cor_toks[0],
                                           "noun")) {
    suffix = "NOM:FORM";
  } else if (replacement && lexicon && src_toks.size() == 1 &&
             cor_toks.size() == 1 &&
             detail::shares_lemma_with_pos(*lexicon, src_toks[0], cor_toks[0],
                                           "verb")) {
    suffix = "VERB:FORM";
  } else if (any_letter(src_toks) || any_letter(cor_toks)) {
    suffix = "LEX";
  } else {
    suffix = "OTHER";
  }
  return std::string(prefix) + ":" + suffix;
}

// hallucination guard: an edit that rewrites most of the sentence or changes
// its length drastically is suspect regardless of category
inline bool flag_suspect_edit(const Edit& edit, const TokenSequence& source) {
  const double n = static_cast<double>(source.size());
  const double span = static_cast<double>(edit.end - edit.start);
  const double cor = static_cast<double>(edit.correction_tokens().size());
  if (n == 0.0) return cor > 0.0;
  if (span / n > 0.5) return true;
  double new_len = n - span + cor;
  double ratio = new_len / n;
  return ratio < 0.5 || ratio > 2.0;
}

constexpr const char* kSuspectFlag = "HALL-SUSPECT";

}  // namespace gectk
