#pragma once

// Context-free corpus noising in the reverse-speller style: each token is
// independently hit with probability p_word by one of five word ops, then the
// characters of the resulting tokens are hit independently with p_char.
//
// Word ops and their fallbacks:
//   substitute  swap the token for one of its confusion-set neighbors;
//               empty suggestion list falls back to one forced char op
//   delete      drop the token; if the sentence would end up empty the last
//               drop is undone
//   insert      keep the token and add a word drawn from the unigram table
//               after it; with no table, falls back to one forced char op
//   swap        exchange the token with its right neighbor, consuming the
//               neighbor's own perturbation draw; at sentence end, falls
//               back to one forced char op
//   recase      toggle the case of the first cased letter; caseless tokens
//               fall back to one forced char op
//
// Char ops: insert, delete, substitute, swap-adjacent, drawing replacement
// characters from a keyboard-adjacency table when one is configured and from
// the dictionary alphabet otherwise.
//
// Each sentence draws from an RNG stream keyed (seed, sentence index), so
// output is reproducible and independent of thread count. The perturbed
// counter in NoiseStats counts trigger decisions (a word swap counts once),
// which is what converges to p_word over a large corpus. Zero noise is the
// identity on raw lines, not a retokenization.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "gectk/align.hpp"
#include "gectk/confusion.hpp"
#include "gectk/errors.hpp"
#include "gectk/rng.hpp"
#include "gectk/text.hpp"
#include "gectk/unicode.hpp"

namespace gectk {

struct NoiseConfig {
  double p_word = 0.15;
  double p_char = 0.02;
  // substitute, delete, insert, swap, recase
  std::vector<double> op_weights = {1, 1, 1, 1, 1};
  // char insert, delete, substitute, swap
  std::vector<double> char_op_weights = {1, 1, 1, 1};
  std::uint64_t seed = 0;

  void validate() const {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(p_word))
      throw ConfigError("p_word must be in [0, 1], got " + std::to_string(p_word));
    if (!in_unit(p_char))
      throw ConfigError("p_char must be in [0, 1], got " + std::to_string(p_char));
    auto check_weights = [](const std::vector<double>& w, std::size_t n,
                            const char* name) {
      if (w.size() != n)
        throw ConfigError(std::string(name) + " needs exactly " +
                          std::to_string(n) + " weights");
      double total = 0.0;
      for (double x : w) {
        if (x < 0.0)
          throw ConfigError(std::string(name) + " has a negative weight");
        total += x;
      }
      if (total <= 0.0)
        throw ConfigError(std::string(name) + " weights are all zero");
    };
    check_weights(op_weights, 5, "op_weights");
    check_weights(char_op_weights, 4, "char_op_weights");
  }
};

struct NoiseStats {
  std::uint64_t tokens = 0;
  std::uint64_t perturbed = 0;  // word-level trigger decisions
  std::uint64_t chars = 0;
  std::uint64_t chars_perturbed = 0;

  NoiseStats& operator+=(const NoiseStats& o) {
    tokens += o.tokens;
    perturbed += o.perturbed;
    chars += o.chars;
    chars_perturbed += o.chars_perturbed;
    return *this;
  }
};

class Noiser {
 public:
  Noiser(NoiseConfig cfg, const ConfusionIndex* index,
         std::vector<std::pair<std::string, std::uint64_t>> unigrams = {},
         std::map<char32_t, std::u32string> keyboard_neighbors = {})
      : cfg_(std::move(cfg)),
        index_(index),
        neighbors_(std::move(keyboard_neighbors)) {
    cfg_.validate();
    if (index_) alphabet_ = index_->alphabet();
    if (alphabet_.empty()) alphabet_ = U"abcdefghijklmnopqrstuvwxyz";
    double acc = 0.0;
    for (auto& [form, count] : unigrams) {
      acc += static_cast<double>(count);
      unigram_forms_.push_back(std::move(form));
      unigram_cum_.push_back(acc);
    }
  }

  const NoiseConfig& config() const { return cfg_; }

  TokenSequence noise(const TokenSequence& s, std::uint64_t sentence_index,
                      NoiseStats* stats = nullptr) const {
    Rng rng(cfg_.seed, sentence_index);
    NoiseStats local;
    local.tokens = s.size();

    // kept tokens carry their original spacing flag, new material gets the
    // canonical one
    std::vector<std::string> out;
    std::vector<std::uint8_t> flags;
    out.reserve(s.size() + 2);
    flags.reserve(s.size() + 2);
    auto push = [&](std::string tok, std::uint8_t flag) {
      out.push_back(std::move(tok));
      flags.push_back(flag);
    };
    std::string last_deleted;
    bool deleted_any = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string& tok = s.tokens[i];
      std::uint8_t flag = s.space_before[i];
      if (cfg_.p_word <= 0.0 || rng.next_double() >= cfg_.p_word) {
        push(tok, flag);
        continue;
      }
      ++local.perturbed;
      switch (rng.weighted(cfg_.op_weights)) {
        case 0: {  // substitute from the confusion set
          std::vector<Suggestion> sugg =
              index_ ? index_->suggest(tok, kSuggestionPool)
                     : std::vector<Suggestion>{};
          if (sugg.empty()) {
            push(forced_char_op(tok, rng), flag);
          } else {
            push(sugg[static_cast<std::size_t>(rng.below(sugg.size()))].word,
                 flag);
          }
          break;
        }
        case 1:  // delete
          last_deleted = tok;
          deleted_any = true;
          break;
        case 2:  // insert a unigram after this token
          push(tok, flag);
          if (unigram_forms_.empty()) {
            out.back() = forced_char_op(tok, rng);
          } else {
            const std::string& word = draw_unigram(rng);
            push(word, detail::attaches_left(word) ? 0 : 1);
          }
          break;
        case 3:  // swap with the next token, consuming it
          if (i + 1 < s.size()) {
            push(s.tokens[i + 1], flag);
            push(tok, s.space_before[i + 1]);
            ++i;
          } else {
            push(forced_char_op(tok, rng), flag);
          }
          break;
        default: {  // recase
          std::string recased = toggle_first_letter(tok);
          push(recased == tok ? forced_char_op(tok, rng) : recased, flag);
          break;
        }
      }
    }
    if (out.empty() && deleted_any) push(last_deleted, 1);

    if (cfg_.p_char > 0.0) {
      for (std::string& tok : out) {
        std::u32string cps = decode_utf8(tok);
        std::u32string noised;
        noised.reserve(cps.size() + 1);
        for (std::size_t i = 0; i < cps.size(); ++i) {
          ++local.chars;
          if (rng.next_double() >= cfg_.p_char) {
            noised.push_back(cps[i]);
            continue;
          }
          ++local.chars_perturbed;
          apply_char_op(rng.weighted(cfg_.char_op_weights), cps, i, noised,
                        rng);
        }
        if (!noised.empty()) tok = encode_utf8(noised);
      }
    } else if (stats) {
      for (const std::string& tok : out) local.chars += decode_utf8(tok).size();
    }

    if (stats) *stats += local;
    TokenSequence result;
    result.tokens = std::move(out);
    result.space_before = std::move(flags);
    if (!result.space_before.empty()) result.space_before[0] = 0;
    return result;
  }

 private:
  static constexpr std::size_t kSuggestionPool = 8;

  const std::string& draw_unigram(Rng& rng) const {
    double x = rng.next_double() * unigram_cum_.back();
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(unigram_cum_.begin(), unigram_cum_.end(), x) -
        unigram_cum_.begin());
    return unigram_forms_[std::min(i, unigram_forms_.size() - 1)];
  }

  char32_t random_letter(Rng& rng, char32_t avoid, char32_t near) const {
    if (auto it = neighbors_.find(near);
        it != neighbors_.end() && !it->second.empty()) {
      const std::u32string& cand = it->second;
      char32_t c = cand[static_cast<std::size_t>(rng.below(cand.size()))];
      if (c != avoid) return c;
    }
    for (int tries = 0; tries < 8; ++tries) {
      char32_t c =
          alphabet_[static_cast<std::size_t>(rng.below(alphabet_.size()))];
      if (c != avoid) return c;
    }
    return alphabet_[0] == avoid && alphabet_.size() > 1 ? alphabet_[1]
                                                         : alphabet_[0];
  }

  void apply_char_op(std::size_t op, const std::u32string& cps, std::size_t& i,
                     std::u32string& out, Rng& rng) const {
    char32_t cur = cps[i];
    switch (op) {
      case 0:  // insert before the current character
        out.push_back(random_letter(rng, 0, cur));
        out.push_back(cur);
        break;
      case 1:  // delete, unless the token is a single character
        if (cps.size() == 1) out.push_back(random_letter(rng, cur, cur));
        break;
      case 2:  // substitute
        out.push_back(random_letter(rng, cur, cur));
        break;
      default:  // swap with the next character; equal pairs substitute instead
        if (i + 1 < cps.size() && cps[i + 1] != cur) {
          out.push_back(cps[i + 1]);
          out.push_back(cur);
          ++i;
        } else {
          out.push_back(random_letter(rng, cur, cur));
        }
        break;
    }
  }

  std::string forced_char_op(const std::string& tok, Rng& rng) const {
    std::u32string cps = decode_utf8(tok);
    if (cps.empty()) return tok;
    std::u32string out;
    std::size_t at = static_cast<std::size_t>(rng.below(cps.size()));
    out.assign(cps, 0, at);
    std::size_t i = at;
    apply_char_op(rng.weighted(cfg_.char_op_weights), cps, i, out, rng);
    out.append(cps, i + 1, std::u32string::npos);
    return out.empty() ? tok : encode_utf8(out);
  }

  static std::string toggle_first_letter(const std::string& tok) {
    std::u32string cps = decode_utf8(tok);
    for (char32_t& cp : cps) {
      if (!is_letter_cp(cp)) continue;
      char32_t lower = to_lower_cp(cp);
      char32_t upper = to_upper_cp(cp);
      if (lower == upper) break;  // caseless letter, caller falls back
      cp = (cp == lower) ? upper : lower;
      return encode_utf8(cps);
    }
    return tok;
  }

  NoiseConfig cfg_;
  const ConfusionIndex* index_;
  std::map<char32_t, std::u32string> neighbors_;
  std::u32string alphabet_;
  std::vector<std::string> unigram_forms_;
  std::vector<double> unigram_cum_;
};

// counts every token in the corpus, for the insert op's unigram table
inline std::vector<std::pair<std::string, std::uint64_t>> unigram_table(
    const Corpus& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const std::string& line : corpus.lines)
    for (const std::string& tok : tokenize(line).tokens) ++counts[tok];
  std::vector<std::pair<std::string, std::uint64_t>> table(counts.begin(),
                                                           counts.end());
  std::sort(table.begin(), table.end());
  return table;
}

inline TokenSequence noise_sentence(const TokenSequence& s,
                                    const NoiseConfig& cfg,
                                    const ConfusionIndex& idx,
                                    std::uint64_t sentence_index,
                                    NoiseStats* stats = nullptr) {
  return Noiser(cfg, &idx).noise(s, sentence_index, stats);
}

// pairs are (noised, clean); the clean side is the input line verbatim
inline ParallelCorpus noise_corpus(const Corpus& corpus, const NoiseConfig& cfg,
                                   const ConfusionIndex& idx, int threads = 1,
                                   NoiseStats* stats = nullptr) {
  cfg.validate();
  ParallelCorpus out;
  out.origin = corpus.origin;
  out.pairs.resize(corpus.lines.size());
  const bool identity = cfg.p_word <= 0.0 && cfg.p_char <= 0.0;
  Noiser noiser(cfg, &idx, identity ? decltype(unigram_table(corpus)){}
                                    : unigram_table(corpus));
  if (threads <= 0)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<NoiseStats> per_thread(static_cast<std::size_t>(threads));
  auto work = [&](int t) {
    for (std::size_t i = static_cast<std::size_t>(t); i < corpus.lines.size();
         i += static_cast<std::size_t>(threads)) {
      if (identity) {
        NoiseStats& st = per_thread[static_cast<std::size_t>(t)];
        st.tokens += tokenize(corpus.lines[i]).size();
        out.pairs[i] = {corpus.lines[i], corpus.lines[i]};
        continue;
      }
      TokenSequence noised = noiser.noise(
          tokenize(corpus.lines[i]), i, &per_thread[static_cast<std::size_t>(t)]);
      out.pairs[i] = {detokenize(noised), corpus.lines[i]};
    }
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (std::thread& th : pool) th.join();
  } else {
    work(0);
  }
  if (stats)
    for (const NoiseStats& st : per_thread) *stats += st;
  return out;
}

}  // namespace gectk
