#pragma once

// Character-level edit distance (optimal string alignment: substitution,
// insertion, deletion, adjacent transposition, unit costs). Operates on code
// points so multi-byte letters count once.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gectk/unicode.hpp"

namespace gectk {

inline unsigned osa_distance(const std::u32string& a, const std::u32string& b,
                             unsigned cap = ~0u) {
  const std::size_t n = a.size(), m = b.size();
  std::size_t diff = n > m ? n - m : m - n;
  if (cap != ~0u && diff > cap) return cap + 1;
  std::vector<unsigned> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<unsigned>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<unsigned>(i);
    unsigned row_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      unsigned sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      unsigned ins = cur[j - 1] + 1;
      unsigned del = prev[j] + 1;
      unsigned best = std::min({sub, ins, del});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        best = std::min(best, prev2[j - 2] + 1);
      cur[j] = best;
      row_min = std::min(row_min, best);
    }
    if (cap != ~0u && row_min > cap) return cap + 1;
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

inline unsigned osa_distance_utf8(std::string_view a, std::string_view b,
                                  unsigned cap = ~0u) {
  return osa_distance(decode_utf8(a), decode_utf8(b), cap);
}

}  // namespace gectk
