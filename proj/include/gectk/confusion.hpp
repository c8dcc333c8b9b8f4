#pragma once

// Speller-style confusion sets: given a dictionary, answer "which known words
// could this word be a slip of?" Candidates are the dictionary entries within
// OSA distance 2 of the query, never the query itself.
//
// Lookup uses the deletion-neighborhood trick: every dictionary word is
// indexed under all variants reachable by deleting up to 2 codepoints, a
// query expands the same way, and bucket intersection gives a candidate pool
// that is then verified with the real distance. For words longer than 32
// codepoints the 2-deletion variants are skipped, which keeps the index from
// exploding on pathological input; such words still match through their
// 0- and 1-deletion variants.
//
// suggest() orders results by (distance, rank), where rank is the word's
// position after sorting the dictionary by descending frequency, ties broken
// lexicographically. Wordlist lines are "form" or "form<TAB>count".

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gectk/editdist.hpp"
#include "gectk/errors.hpp"
#include "gectk/text.hpp"
#include "gectk/unicode.hpp"

namespace gectk {

struct Suggestion {
  std::string word;
  std::uint32_t distance = 0;
  std::uint64_t frequency = 0;
  bool operator==(const Suggestion&) const = default;
};

class ConfusionIndex {
 public:
  static constexpr std::size_t kMaxLenForTwoDeletions = 32;

  static ConfusionIndex from_corpus(const Corpus& wordlist) {
    std::unordered_map<std::string, std::uint64_t> freq;
    std::size_t line_no = 0;
    for (const std::string& line : wordlist.lines) {
      ++line_no;
      std::string form = line;
      std::uint64_t count = 1;
      if (std::size_t tab = line.find('\t'); tab != std::string::npos) {
        form = line.substr(0, tab);
        std::string rest = line.substr(tab + 1);
        try {
          std::size_t used = 0;
          count = std::stoull(rest, &used);
          if (used != rest.size()) throw std::invalid_argument(rest);
        } catch (const std::exception&) {
          throw FormatError("wordlist frequency is not a number: \"" + rest +
                                "\"",
                            line_no);
        }
      }
      if (form.empty()) continue;
      freq[form] += count;
    }
    if (freq.empty()) throw EmptyLexicon("wordlist has no usable entries");

    ConfusionIndex idx;
    idx.entries_.reserve(freq.size());
    for (auto& [form, count] : freq) {
      Entry e;
      e.form = form;
      e.form32 = decode_utf8(form);
      e.frequency = count;
      idx.entries_.push_back(std::move(e));
    }
    std::sort(idx.entries_.begin(), idx.entries_.end(),
              [](const Entry& a, const Entry& b) {
                if (a.frequency != b.frequency) return a.frequency > b.frequency;
                return a.form < b.form;
              });
    for (std::uint32_t id = 0; id < idx.entries_.size(); ++id) {
      idx.by_form_.emplace(idx.entries_[id].form, id);
      for (const std::u32string& v : deletion_variants(idx.entries_[id].form32))
        idx.buckets_[encode_utf8(v)].push_back(id);
    }
    return idx;
  }

  static ConfusionIndex from_file(const std::string& path) {
    return from_corpus(load_corpus(path));
  }

  bool contains(const std::string& word) const {
    return by_form_.count(word) != 0;
  }

  std::size_t size() const { return entries_.size(); }

  std::uint64_t frequency_of(const std::string& word) const {
    auto it = by_form_.find(word);
    return it == by_form_.end() ? 0 : entries_[it->second].frequency;
  }

  // up to max_results in-dictionary words at OSA distance 1..2 from the query
  std::vector<Suggestion> suggest(const std::string& word,
                                  std::size_t max_results = 8) const {
    std::u32string query = decode_utf8(word);
    std::unordered_set<std::uint32_t> seen;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> hits;  // (rank, dist)
    for (const std::u32string& v : deletion_variants(query)) {
      auto it = buckets_.find(encode_utf8(v));
      if (it == buckets_.end()) continue;
      for (std::uint32_t id : it->second) {
        if (!seen.insert(id).second) continue;
        const Entry& e = entries_[id];
        if (e.form32 == query) continue;
        std::uint32_t d = osa_distance(query, e.form32, 2);
        if (d <= 2) hits.emplace_back(id, d);
      }
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second < b.second;
                return a.first < b.first;
              });
    if (hits.size() > max_results) hits.resize(max_results);
    std::vector<Suggestion> out;
    out.reserve(hits.size());
    for (const auto& [id, d] : hits)
      out.push_back({entries_[id].form, d, entries_[id].frequency});
    return out;
  }

  // codepoints seen across dictionary words, for character-level noise
  std::u32string alphabet() const {
    std::unordered_set<char32_t> set;
    for (const Entry& e : entries_)
      for (char32_t cp : e.form32)
        if (is_letter_cp(cp)) set.insert(cp);
    std::u32string out(set.begin(), set.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Entry {
    std::string form;
    std::u32string form32;
    std::uint64_t frequency = 0;
  };

  static std::vector<std::u32string> deletion_variants(
      const std::u32string& w) {
    std::vector<std::u32string> out;
    out.push_back(w);
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::u32string one = w;
      one.erase(i, 1);
      out.push_back(one);
      if (w.size() > kMaxLenForTwoDeletions) continue;
      for (std::size_t j = i; j < one.size(); ++j) {
        std::u32string two = one;
        two.erase(j, 1);
        out.push_back(two);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<Entry> entries_;  // sorted by (frequency desc, form asc)
  std::unordered_map<std::string, std::uint32_t> by_form_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> buckets_;
};

inline ConfusionIndex build_confusion_index(const Corpus& wordlist) {
  return ConfusionIndex::from_corpus(wordlist);
}

}  // namespace gectk
