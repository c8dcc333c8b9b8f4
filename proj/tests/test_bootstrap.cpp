#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "gectk/align.hpp"
#include "gectk/bootstrap.hpp"
#include "gectk/score.hpp"
#include "support/helpers.hpp"

using namespace gectk;

static SentenceCounts triple(std::uint64_t tp, std::uint64_t fp,
                             std::uint64_t fn) {
  SentenceCounts c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  return c;
}

// written from the definition, not from the library code
static double f_of_sum(const std::vector<SentenceCounts>& v,
                       const std::vector<std::size_t>& idx) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i : idx) {
    tp += v[i].tp;
    fp += v[i].fp;
    fn += v[i].fn;
  }
  double p = (tp + fp == 0) ? 1.0 : static_cast<double>(tp) / (tp + fp);
  double r = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / (tp + fn);
  if (p == 0.0 && r == 0.0) return 0.0;
  return 1.25 * p * r / (0.25 * p + r);
}

TEST_CASE("identical systems are never significant") {
  std::vector<SentenceCounts> a = {triple(1, 0, 0), triple(0, 1, 1)};
  BootstrapResult res = paired_bootstrap(a, a, 1000, 0.05, 7);
  CHECK(res.delta_f_half == 0.0);
  CHECK(res.p_value == 1.0);
  CHECK_FALSE(res.significant);
  CHECK(res.samples == 0);
}

TEST_CASE("total dominance gives p zero") {
  std::vector<SentenceCounts> a, b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(triple(1, 0, 0));  // perfect everywhere
    b.push_back(triple(0, 1, 1));  // wrong everywhere
  }
  BootstrapResult res = paired_bootstrap(a, b, 5000, 0.05, 7);
  CHECK(res.delta_f_half == 1.0);
  CHECK(res.p_value == 0.0);
  CHECK(res.significant);
  CHECK(res.exhaustive);       // 5^5 = 3125 <= 5000
  CHECK(res.samples == 3125);
}

TEST_CASE("three-sentence enumeration matches a hand-rolled one") {
  std::vector<SentenceCounts> a = {triple(1, 0, 0), triple(0, 1, 1),
                                   triple(1, 0, 0)};
  std::vector<SentenceCounts> b = {triple(0, 1, 1), triple(1, 0, 0),
                                   triple(1, 1, 0)};

  double delta = f_of_sum(a, {0, 1, 2}) - f_of_sum(b, {0, 1, 2});
  REQUIRE(delta > 0.0);  // the fixture is meant to have a winner

  std::uint64_t upsets = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) {
        std::vector<std::size_t> idx = {i, j, k};
        if (f_of_sum(a, idx) <= f_of_sum(b, idx)) ++upsets;
      }
  double expected_p = static_cast<double>(upsets) / 27.0;
  REQUIRE(upsets > 0);   // and still a mixed outcome
  REQUIRE(upsets < 27);

  BootstrapResult res = paired_bootstrap(a, b, 27, 0.05, 99);
  CHECK(res.exhaustive);
  CHECK(res.samples == 27);
  CHECK(res.delta_f_half == Catch::Approx(delta).margin(1e-12));
  CHECK(res.p_value == Catch::Approx(expected_p).margin(1e-12));

  // a smaller budget than 27 falls back to sampling
  BootstrapResult sampled = paired_bootstrap(a, b, 26, 0.05, 99);
  CHECK_FALSE(sampled.exhaustive);
  CHECK(sampled.samples == 26);
}

TEST_CASE("sampled path is deterministic and thread-independent") {
  std::vector<SentenceCounts> a, b;
  Rng rng(512, 0);
  for (int i = 0; i < 12; ++i) {
    a.push_back(triple(rng.below(4), rng.below(3), rng.below(3)));
    b.push_back(triple(rng.below(4), rng.below(3), rng.below(3)));
  }
  if (f_of_sum(a, {0}) == f_of_sum(b, {0})) a[0].tp += 2;  // avoid zero delta
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < a.size(); ++i) all.push_back(i);
  if (f_of_sum(a, all) == f_of_sum(b, all)) a[0].tp += 3;

  BootstrapResult r1 = paired_bootstrap(a, b, 2000, 0.05, 31, 1);
  BootstrapResult r2 = paired_bootstrap(a, b, 2000, 0.05, 31, 1);
  BootstrapResult r3 = paired_bootstrap(a, b, 2000, 0.05, 31, 3);
  CHECK_FALSE(r1.exhaustive);
  CHECK(r1.samples == 2000);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.p_value == r3.p_value);
  CHECK(r1.p_value >= 0.0);
  CHECK(r1.p_value <= 1.0);

  BootstrapResult other = paired_bootstrap(a, b, 2000, 0.05, 32, 1);
  CHECK(other.p_value >= 0.0);
  CHECK(other.p_value <= 1.0);
}

TEST_CASE("significance compares p against alpha strictly") {
  std::vector<SentenceCounts> a, b;
  for (int i = 0; i < 4; ++i) {
    a.push_back(triple(1, 0, 0));
    b.push_back(triple(0, 1, 1));
  }
  // p = 0 here, so any positive alpha flags it
  BootstrapResult res = paired_bootstrap(a, b, 256, 0.001, 7);
  CHECK(res.significant);

  // identical systems report p = 1, never below alpha
  BootstrapResult same = paired_bootstrap(a, a, 256, 0.999, 7);
  CHECK_FALSE(same.significant);
}

TEST_CASE("bootstrap input validation") {
  std::vector<SentenceCounts> a = {triple(1, 0, 0)};
  std::vector<SentenceCounts> b = {triple(1, 0, 0), triple(0, 1, 0)};
  REQUIRE_THROWS_AS(paired_bootstrap(a, b, 100, 0.05, 1), LengthMismatch);
  REQUIRE_THROWS_AS(paired_bootstrap({}, {}, 100, 0.05, 1), LengthMismatch);
  REQUIRE_THROWS_AS(paired_bootstrap(a, a, 0, 0.05, 1), Error);
}

TEST_CASE("compare_systems scores and bootstraps in one call") {
  std::vector<M2Record> gold;
  std::vector<std::string> fixed, untouched;
  for (const auto& [src, tgt] :
       std::vector<std::pair<std::string, std::string>>{
           {"he go home", "he goes home"},
           {"a smal cat", "a small cat"},
           {"it rain now", "it rains now"}}) {
    M2Record rec;
    rec.source = tokenize(src);
    rec.annotators[0] = extract_edits(rec.source, tokenize(tgt));
    gold.push_back(std::move(rec));
    fixed.push_back(tgt);
    untouched.push_back(src);
  }
  ScoreReport ra, rb;
  BootstrapResult res =
      compare_systems(gold, fixed, untouched, 27, 0.05, 5, 1, &ra, &rb);
  CHECK(ra.recall() == 1.0);
  CHECK(rb.recall() == 0.0);
  CHECK(res.exhaustive);
  CHECK(res.delta_f_half == 1.0);
  CHECK(res.p_value == 0.0);
  CHECK(res.significant);
}
