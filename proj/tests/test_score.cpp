#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "gectk/align.hpp"
#include "gectk/classify.hpp"
#include "gectk/rng.hpp"
#include "gectk/score.hpp"
#include "support/helpers.hpp"

using namespace gectk;

// gold records built through the toolkit's own extractor, so edit granularity
// is self-consistent
static std::vector<M2Record> gold_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<M2Record> records;
  for (const auto& [src_text, tgt_text] : pairs) {
    M2Record rec;
    rec.source = tokenize(src_text);
    std::vector<Edit> edits = extract_edits(rec.source, tokenize(tgt_text));
    for (Edit& e : edits) e.category = classify_edit(e, rec.source);
    rec.annotators[0] = std::move(edits);
    records.push_back(std::move(rec));
  }
  return records;
}

TEST_CASE("precision and recall conventions") {
  CHECK(precision_of(0, 0) == 1.0);
  CHECK(recall_of(0, 0) == 1.0);
  CHECK(precision_of(3, 1) == 0.75);
  CHECK(recall_of(3, 3) == 0.5);
  CHECK(f_half_of(0.0, 0.0) == 0.0);
  CHECK(f_half_of(1.0, 1.0) == 1.0);
  // equal precision and recall collapse to that value
  CHECK(f_half_of(0.4, 0.4) == Catch::Approx(0.4));
}

TEST_CASE("published-style F0.5 figures reproduce from count triples") {
  struct Case {
    double p, r, f;
  };
  for (const Case& c : {Case{73.85, 57.83, 69.97}, Case{79.98, 51.76, 72.12},
                        Case{80.37, 53.19, 72.92}}) {
    // counts engineered so P and R are exact
    std::uint64_t scale_p = static_cast<std::uint64_t>(c.p * 100.0 + 0.5);
    std::uint64_t scale_r = static_cast<std::uint64_t>(c.r * 100.0 + 0.5);
    std::uint64_t tp = scale_p * scale_r;
    std::uint64_t fp = scale_r * 10000 - tp;
    std::uint64_t fn = scale_p * 10000 - tp;
    ScoreReport rep = ScoreReport::from_counts(tp, fp, fn);
    CHECK(rep.precision() * 100.0 == Catch::Approx(c.p).margin(1e-9));
    CHECK(rep.recall() * 100.0 == Catch::Approx(c.r).margin(1e-9));
    CHECK(rep.f_half() * 100.0 == Catch::Approx(c.f).margin(0.005));
  }
}

TEST_CASE("score requires matching lengths") {
  auto gold = gold_from_pairs({{"a b", "a b"}});
  REQUIRE_THROWS_AS(score(gold, {"a b", "extra"}), LengthMismatch);
  REQUIRE_THROWS_AS(score(gold, {}), LengthMismatch);
}

TEST_CASE("echoing the source scores P=1 R=0, echoing gold scores R=1") {
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"He go to school .", "He goes to school ."},
      {"I home went .", "I went home ."},
      {"the the dog barks", "the dog barks"},
  };
  auto gold = gold_from_pairs(pairs);

  std::vector<std::string> echo_src, echo_gold;
  for (const auto& [s, t] : pairs) {
    echo_src.push_back(s);
    echo_gold.push_back(t);
  }

  ScoreReport as_is = score(gold, echo_src);
  CHECK(as_is.tp == 0);
  CHECK(as_is.fp == 0);
  CHECK(as_is.precision() == 1.0);
  CHECK(as_is.recall() == 0.0);
  CHECK(as_is.f_half() == 0.0);

  ScoreReport perfect = score(gold, echo_gold);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);
  CHECK(perfect.precision() == 1.0);
  CHECK(perfect.recall() == 1.0);
  CHECK(perfect.f_half() == 1.0);
}

TEST_CASE("matching ignores category but not span or correction") {
  M2Record rec;
  rec.source = from_pretokenized("He go to school .");
  Edit g;
  g.start = 1;
  g.end = 2;
  g.correction = "goes";
  g.category = "SOME:ODD:LABEL";
  rec.annotators[0] = {g};
  ScoreReport rep = score({rec}, {"He goes to school ."});
  CHECK(rep.tp == 1);
  CHECK(rep.fp == 0);
  CHECK(rep.fn == 0);

  // same span, different correction: no match
  ScoreReport miss = score({rec}, {"He gone to school ."});
  CHECK(miss.tp == 0);
  CHECK(miss.fp == 1);
  CHECK(miss.fn == 1);
}

TEST_CASE("per-category table attributes gold edits of the chosen annotator") {
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"he go home", "He goes home"},   // R:CASE + R:VERB-ish edits
      {"she like it", "she likes it"},
      {"dog runs fast", "dog runs fast"},
  };
  auto gold = gold_from_pairs(pairs);
  // correct only the first sentence fully
  ScoreReport rep = score(gold, {"He goes home", "she like it", "dog runs fast"});
  std::uint64_t total = 0, matched = 0;
  for (const auto& [cat, cc] : rep.per_category) {
    total += cc.total;
    matched += cc.matched;
  }
  CHECK(total == rep.tp + rep.fn);
  CHECK(matched == rep.tp);

  auto rows = category_recall_table(rep);
  REQUIRE_FALSE(rows.empty());
  for (std::size_t i = 1; i < rows.size(); ++i)
    REQUIRE(rows[i - 1].total >= rows[i].total);
}

TEST_CASE("half-matched category recall comes out at one half") {
  // four identical spelling fixes, two corrected
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"the scool", "the school"},
      {"a scool", "a school"},
      {"my scool", "my school"},
      {"his scool", "his school"},
  };
  auto gold = gold_from_pairs(pairs);
  ScoreReport rep =
      score(gold, {"the school", "a school", "my scool", "his scool"});
  REQUIRE(rep.per_category.size() == 1);
  const auto& cc = rep.per_category.begin()->second;
  CHECK(cc.total == 4);
  CHECK(cc.matched == 2);
  CHECK(cc.recall() == 0.5);
}

TEST_CASE("annotator choice maximizes sentence F0.5, ties to lowest id") {
  M2Record rec;
  rec.source = from_pretokenized("a b c");
  Edit e1;
  e1.start = 0;
  e1.end = 1;
  e1.correction = "x";
  e1.category = "R:LEX";
  // annotator 0 wants an edit the hypothesis does not make
  rec.annotators[0] = {e1};
  // annotator 1 saw nothing to fix
  rec.annotators[1] = {};

  // hypothesis equals source: annotator 1 gives P=R=1, annotator 0 gives R=0
  ScoreReport rep = score({rec}, {"a b c"});
  CHECK(rep.tp == 0);
  CHECK(rep.fn == 0);
  CHECK(rep.f_half() == 1.0);

  // tie case: identical annotators, category attribution goes to the lowest id
  M2Record tie;
  tie.source = from_pretokenized("x y");
  Edit a0 = e1;
  a0.category = "FROM:ZERO";
  Edit a1 = e1;
  a1.category = "FROM:ONE";
  tie.annotators[0] = {a0};
  tie.annotators[1] = {a1};
  ScoreReport tied = score({tie}, {"x y"});
  REQUIRE(tied.per_category.count("FROM:ZERO") == 1);
  REQUIRE(tied.per_category.count("FROM:ONE") == 0);
}

TEST_CASE("adding an annotator never lowers a sentence's selected F0.5") {
  for (std::uint64_t iter = 0; iter < 300; ++iter) {
    Rng rng(608, iter);
    static const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
    auto sentence = [&](std::size_t len) {
      std::vector<std::string> toks;
      for (std::size_t i = 0; i < len; ++i)
        toks.push_back(vocab[static_cast<std::size_t>(rng.below(vocab.size()))]);
      return toks;
    };
    std::vector<std::string> src = sentence(3 + rng.below(4));
    std::vector<std::string> hyp = sentence(3 + rng.below(4));
    std::vector<std::string> ann_a = sentence(3 + rng.below(4));
    std::vector<std::string> ann_b = sentence(3 + rng.below(4));

    M2Record one;
    one.source = testsupport::seq_of(src);
    auto edits_for = [&](const std::vector<std::string>& toks) {
      return extract_edits(one.source, testsupport::seq_of(toks));
    };
    one.annotators[0] = edits_for(ann_a);
    M2Record two = one;
    two.annotators[1] = edits_for(ann_b);

    std::string hyp_line = join_tokens(hyp);
    double f_one = score({one}, {hyp_line}).f_half();
    double f_two = score({two}, {hyp_line}).f_half();
    REQUIRE(f_two >= f_one - 1e-12);
  }
}

TEST_CASE("per-sentence triples sum to the corpus totals") {
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"he go", "He goes"},
      {"fine already", "fine already"},
      {"a b c d", "a c b d"},
  };
  auto gold = gold_from_pairs(pairs);
  ScoreReport rep = score(gold, {"He go", "fine already !", "a c b d"});
  REQUIRE(rep.per_sentence.size() == 3);
  SentenceCounts sum;
  for (const auto& c : rep.per_sentence) {
    sum.tp += c.tp;
    sum.fp += c.fp;
    sum.fn += c.fn;
  }
  CHECK(sum.tp == rep.tp);
  CHECK(sum.fp == rep.fp);
  CHECK(sum.fn == rep.fn);
}

TEST_CASE("threaded scoring matches single-threaded scoring") {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.push_back({"sent " + std::to_string(i) + " has a smal error here",
                     "sent " + std::to_string(i) + " has a small error here"});
  }
  auto gold = gold_from_pairs(pairs);
  std::vector<std::string> hyp;
  for (int i = 0; i < 40; ++i)
    hyp.push_back("sent " + std::to_string(i) + " has a small error here");
  ScoreOptions seq;
  seq.threads = 1;
  ScoreOptions par;
  par.threads = 4;
  ScoreReport a = score(gold, hyp, seq);
  ScoreReport b = score(gold, hyp, par);
  CHECK(a.tp == b.tp);
  CHECK(a.fp == b.fp);
  CHECK(a.fn == b.fn);
  CHECK(a.per_sentence == b.per_sentence);
}

TEST_CASE("cumulative annotator selection follows the running totals") {
  // one sentence, two annotators: the cumulative variant must agree with the
  // local one on the first sentence
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"x y z", "x q z"},
      {"u v w", "u m w"},
  };
  auto gold = gold_from_pairs(pairs);
  std::vector<std::string> hyp = {"x q z", "u v w"};
  ScoreOptions cum;
  cum.cumulative_annotator = true;
  ScoreReport local = score(gold, hyp);
  ScoreReport running = score(gold, hyp, cum);
  CHECK(local.tp == running.tp);
  CHECK(local.fn == running.fn);
}

TEST_CASE("json report carries the published shape with 4-decimal numbers") {
  auto gold = gold_from_pairs({{"he go", "He goes"}});
  ScoreReport rep = score(gold, {"He goes"});
  nlohmann::json j = report_to_json(rep);
  REQUIRE(j.contains("counts"));
  REQUIRE(j["counts"].contains("tp"));
  REQUIRE(j.contains("precision"));
  REQUIRE(j.contains("recall"));
  REQUIRE(j.contains("f05"));
  REQUIRE(j["categories"].is_array());
  REQUIRE(j["sentences"].is_array());
  REQUIRE(j["diagnostics"].is_array());
  double p = j["precision"].get<double>();
  CHECK(p == round4(p));
  ScoreReport odd = ScoreReport::from_counts(1, 2, 0);  // P = 1/3
  nlohmann::json jo = report_to_json(odd);
  CHECK(jo["precision"].get<double>() == 0.3333);
}

TEST_CASE("suspect hypothesis edits land in report diagnostics") {
  auto gold = gold_from_pairs({{"one two three four five six", "one two three four five six"}});
  // hypothesis rewrites everything
  ScoreReport rep = score(gold, {"совсем другое предложение"});
  REQUIRE_FALSE(rep.diagnostics.empty());
  CHECK(rep.diagnostics[0].flag == kSuspectFlag);
  CHECK(rep.diagnostics[0].sentence == 0);
}
