#pragma once

// Shared test helpers: a scratch directory and independent reference
// implementations (deliberately written differently from the library: plain
// top-down recursion with memo maps) used to check costs and distances.

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gectk/text.hpp"
#include "gectk/unicode.hpp"

namespace testsupport {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    dir_ = std::filesystem::temp_directory_path() /
           ("gectk-" + tag + "-" + std::to_string(rd()) + "-" +
            std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path operator/(const std::string& name) const {
    return dir_ / name;
  }

 private:
  std::filesystem::path dir_;
};

// reference token-alignment cost: recursive minimum over the same move set
// (match 0, case-only substitution 0.5, substitution/insertion/deletion 1,
// adjacent transposition 1)
class AlignCostOracle {
 public:
  AlignCostOracle(const std::vector<std::string>& src,
                  const std::vector<std::string>& tgt)
      : src_(src), tgt_(tgt) {}

  double cost() { return solve(src_.size(), tgt_.size()); }

 private:
  double solve(std::size_t i, std::size_t j) {
    if (i == 0) return static_cast<double>(j);
    if (j == 0) return static_cast<double>(i);
    auto key = std::make_pair(i, j);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    double sub_cost;
    if (src_[i - 1] == tgt_[j - 1])
      sub_cost = 0.0;
    else if (gectk::fold_case_utf8(src_[i - 1]) == gectk::fold_case_utf8(tgt_[j - 1]))
      sub_cost = 0.5;
    else
      sub_cost = 1.0;
    double best = solve(i - 1, j - 1) + sub_cost;
    best = std::min(best, solve(i - 1, j) + 1.0);
    best = std::min(best, solve(i, j - 1) + 1.0);
    if (i >= 2 && j >= 2 && src_[i - 1] == tgt_[j - 2] && src_[i - 2] == tgt_[j - 1])
      best = std::min(best, solve(i - 2, j - 2) + 1.0);
    memo_[key] = best;
    return best;
  }

  const std::vector<std::string>& src_;
  const std::vector<std::string>& tgt_;
  std::map<std::pair<std::size_t, std::size_t>, double> memo_;
};

inline double oracle_align_cost(const std::vector<std::string>& src,
                                const std::vector<std::string>& tgt) {
  return AlignCostOracle(src, tgt).cost();
}

// reference character distance with adjacent transposition, recursive
inline unsigned oracle_char_distance(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, unsigned> memo;
  struct Solver {
    const std::u32string& a;
    const std::u32string& b;
    std::map<std::pair<std::size_t, std::size_t>, unsigned>& memo;
    unsigned solve(std::size_t i, std::size_t j) {
      if (i == 0) return static_cast<unsigned>(j);
      if (j == 0) return static_cast<unsigned>(i);
      auto key = std::make_pair(i, j);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
      unsigned best = solve(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
      best = std::min(best, solve(i - 1, j) + 1);
      best = std::min(best, solve(i, j - 1) + 1);
      if (i >= 2 && j >= 2 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        best = std::min(best, solve(i - 2, j - 2) + 1);
      memo[key] = best;
      return best;
    }
  } s{a, b, memo};
  return s.solve(a.size(), b.size());
}

inline unsigned oracle_char_distance_utf8(const std::string& a, const std::string& b) {
  return oracle_char_distance(gectk::decode_utf8(a), gectk::decode_utf8(b));
}

inline gectk::TokenSequence seq_of(const std::vector<std::string>& tokens) {
  gectk::TokenSequence s;
  s.tokens = tokens;
  s.space_before.assign(tokens.size(), 1);
  if (!s.space_before.empty()) s.space_before[0] = 0;
  return s;
}

}  // namespace testsupport
