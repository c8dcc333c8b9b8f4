#pragma once

// Token-level alignment between an errorful sentence and its correction, and
// the edits derived from it.
//
// Alignment costs: match 0, substitution 1, insertion 1, deletion 1, adjacent
// transposition 1, substitution of tokens equal up to letter case 0.5. Cost
// ties resolve in a fixed order (diagonal, transposition, deletion,
// insertion) so extraction is deterministic.
//
// Extraction merges every maximal run of adjacent non-match operations into
// one edit; a matched token always breaks a run. So
//   He go to school .  ->  He goes to school .    gives (1,2,"goes")
//   I home went .      ->  I went home .          gives (1,3,"went home")
//
// apply_edits() replays edits right to left. Spans must be sorted and
// non-overlapping (OverlapError otherwise). Edits carry no spacing, so the
// result gets canonical spacing: a space before every token except the first
// and except attach-left punctuation; surviving source tokens keep theirs.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "gectk/errors.hpp"
#include "gectk/m2.hpp"
#include "gectk/text.hpp"

namespace gectk {

enum class OpKind : std::uint8_t { Match, Substitute, Insert, Delete, Transpose };

struct AlignmentOp {
  OpKind kind;
  int src_begin, src_end;  // token span in the source
  int tgt_begin, tgt_end;  // token span in the target
};

namespace detail {

inline double token_sub_cost(const std::string& a, const std::string& b) {
  if (a == b) return 0.0;
  if (case_only_difference(a, b)) return 0.5;
  return 1.0;
}

}  // namespace detail

// minimal-cost alignment; ops tile both sequences in order
inline std::vector<AlignmentOp> align_tokens(const TokenSequence& src,
                                             const TokenSequence& tgt) {
  const int n = static_cast<int>(src.size());
  const int m = static_cast<int>(tgt.size());
  const int w = m + 1;
  std::vector<double> cost(static_cast<std::size_t>(n + 1) * w, 0.0);
  std::vector<std::uint8_t> move(static_cast<std::size_t>(n + 1) * w, 0);
  // moves: 1 diagonal (match/sub), 2 transpose, 3 delete, 4 insert
  auto at = [w](int i, int j) { return static_cast<std::size_t>(i) * w + j; };
  for (int j = 1; j <= m; ++j) {
    cost[at(0, j)] = j;
    move[at(0, j)] = 4;
  }
  for (int i = 1; i <= n; ++i) {
    cost[at(i, 0)] = i;
    move[at(i, 0)] = 3;
    for (int j = 1; j <= m; ++j) {
      double best = cost[at(i - 1, j - 1)] +
                    detail::token_sub_cost(src.tokens[i - 1], tgt.tokens[j - 1]);
      std::uint8_t best_move = 1;
      if (i > 1 && j > 1 && src.tokens[i - 1] == tgt.tokens[j - 2] &&
          src.tokens[i - 2] == tgt.tokens[j - 1] &&
          src.tokens[i - 1] != src.tokens[i - 2]) {
        double t = cost[at(i - 2, j - 2)] + 1.0;
        if (t < best) {
          best = t;
          best_move = 2;
        }
      }
      if (double d = cost[at(i - 1, j)] + 1.0; d < best) {
        best = d;
        best_move = 3;
      }
      if (double ins = cost[at(i, j - 1)] + 1.0; ins < best) {
        best = ins;
        best_move = 4;
      }
      cost[at(i, j)] = best;
      move[at(i, j)] = best_move;
    }
  }
  std::vector<AlignmentOp> ops;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    switch (move[at(i, j)]) {
      case 1: {
        OpKind kind = src.tokens[i - 1] == tgt.tokens[j - 1] ? OpKind::Match
                                                             : OpKind::Substitute;
        ops.push_back({kind, i - 1, i, j - 1, j});
        --i;
        --j;
        break;
      }
      case 2:
        ops.push_back({OpKind::Transpose, i - 2, i, j - 2, j});
        i -= 2;
        j -= 2;
        break;
      case 3:
        ops.push_back({OpKind::Delete, i - 1, i, j, j});
        --i;
        break;
      default:
        ops.push_back({OpKind::Insert, i, i, j - 1, j});
        --j;
        break;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

inline double alignment_cost(const TokenSequence& src, const TokenSequence& tgt) {
  double total = 0.0;
  for (const AlignmentOp& op : align_tokens(src, tgt)) {
    switch (op.kind) {
      case OpKind::Match:
        break;
      case OpKind::Substitute:
        total += detail::token_sub_cost(src.tokens[op.src_begin],
                                        tgt.tokens[op.tgt_begin]);
        break;
      default:
        total += 1.0;
        break;
    }
  }
  return total;
}

// maximal runs of non-match ops, each collapsed into one edit
inline std::vector<Edit> extract_edits(const TokenSequence& src,
                                       const TokenSequence& tgt) {
  std::vector<Edit> edits;
  std::vector<AlignmentOp> ops = align_tokens(src, tgt);
  std::size_t k = 0;
  while (k < ops.size()) {
    if (ops[k].kind == OpKind::Match) {
      ++k;
      continue;
    }
    std::size_t begin = k;
    while (k < ops.size() && ops[k].kind != OpKind::Match) ++k;
    Edit e;
    e.start = ops[begin].src_begin;
    e.end = ops[k - 1].src_end;
    std::vector<std::string> corr(tgt.tokens.begin() + ops[begin].tgt_begin,
                                  tgt.tokens.begin() + ops[k - 1].tgt_end);
    e.correction = join_tokens(corr);
    edits.push_back(std::move(e));
  }
  return edits;
}

namespace detail {

// no space before sentence punctuation when spacing must be reconstructed
inline bool attaches_left(const std::string& tok) {
  if (tok.empty()) return false;
  char32_t cp = decode_utf8(tok)[0];
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U')': case 0x2026: case 0x00BB: case 0x201D: case 0x2019:
      return true;
    default:
      return false;
  }
}

inline std::uint8_t canonical_space(const std::string& tok) {
  return attaches_left(tok) ? 0 : 1;
}

}  // namespace detail

inline TokenSequence apply_edits(const TokenSequence& src,
                                 const std::vector<Edit>& edits) {
  const int n = static_cast<int>(src.size());
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const Edit& e = edits[i];
    if (e.start < 0 || e.end < e.start || e.end > n)
      throw OverlapError("edit span " + std::to_string(e.start) + " " +
                         std::to_string(e.end) + " out of range for " +
                         std::to_string(n) + " tokens");
    if (i > 0 && edits[i - 1].end > e.start)
      throw OverlapError("edits overlap or are unsorted at span " +
                         std::to_string(e.start) + " " + std::to_string(e.end));
  }
  TokenSequence out = src;
  // the leading token's flag is position-dependent, not intrinsic; give it
  // its natural value so material spliced in front of it detaches cleanly
  if (!out.tokens.empty())
    out.space_before[0] = detail::canonical_space(out.tokens[0]);
  for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
    std::vector<std::string> repl = it->correction_tokens();
    std::vector<std::uint8_t> repl_space(repl.size());
    for (std::size_t k = 0; k < repl.size(); ++k)
      repl_space[k] = detail::canonical_space(repl[k]);
    out.tokens.erase(out.tokens.begin() + it->start, out.tokens.begin() + it->end);
    out.tokens.insert(out.tokens.begin() + it->start, repl.begin(), repl.end());
    out.space_before.erase(out.space_before.begin() + it->start,
                           out.space_before.begin() + it->end);
    out.space_before.insert(out.space_before.begin() + it->start,
                            repl_space.begin(), repl_space.end());
  }
  if (!out.space_before.empty()) out.space_before[0] = 0;
  return out;
}

}  // namespace gectk
