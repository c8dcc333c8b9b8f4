#pragma once

// Scoring a corrector's output against M2 gold annotations.
//
// Per sentence, hypothesis edits come from extract_edits(source, hypothesis).
// A hypothesis edit counts as true positive when some gold edit of the
// evaluated annotator has the same span and the same correction string
// (category is ignored for matching). With several annotators the one whose
// edits give the best sentence-level F0.5 is kept, ties to the lowest id;
// --cumulative-annotator switches to the sequential variant where each
// sentence picks the annotator maximizing F0.5 of the running totals.
//
// Conventions: precision = tp/(tp+fp) and recall = tp/(tp+fn), both 1.0 when
// the denominator is 0; F0.5 = 1.25*P*R/(0.25*P+R), 0.0 when that denominator
// is 0. Per-category rows attribute the selected annotator's gold edits by
// their category, so category totals always sum to tp+fn.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gectk/align.hpp"
#include "gectk/classify.hpp"
#include "gectk/errors.hpp"
#include "gectk/m2.hpp"
#include "gectk/text.hpp"

namespace gectk {

struct SentenceCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0;

  bool operator==(const SentenceCounts&) const = default;
};

struct CategoryCount {
  std::uint64_t matched = 0, total = 0;

  double recall() const {
    return total == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(total);
  }
};

struct EditDiagnostic {
  std::size_t sentence = 0;
  int start = 0, end = 0;
  std::string category;
  std::string flag;
};

inline double precision_of(std::uint64_t tp, std::uint64_t fp) {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

inline double recall_of(std::uint64_t tp, std::uint64_t fn) {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

inline double f_half_of(double p, double r) {
  double denom = 0.25 * p + r;
  return denom == 0.0 ? 0.0 : 1.25 * p * r / denom;
}

struct ScoreReport {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::map<std::string, CategoryCount> per_category;
  std::vector<SentenceCounts> per_sentence;
  std::vector<EditDiagnostic> diagnostics;

  double precision() const { return precision_of(tp, fp); }
  double recall() const { return recall_of(tp, fn); }
  double f_half() const { return f_half_of(precision(), recall()); }

  static ScoreReport from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    ScoreReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.per_sentence.push_back({tp, fp, fn});
    return r;
  }
};

struct ScoreOptions {
  bool cumulative_annotator = false;
  const Lexicon* lexicon = nullptr;  // labels diagnostics only, never the math
  int threads = 1;
};

namespace detail {

struct SentenceJudgement {
  // per annotator id: counts plus which gold edits were matched
  struct PerAnnotator {
    int id = 0;
    SentenceCounts counts;
    std::vector<const Edit*> gold;
    std::vector<bool> matched;
  };
  std::vector<PerAnnotator> annotators;
  std::vector<EditDiagnostic> diagnostics;
};

inline SentenceJudgement judge_sentence(const M2Record& rec,
                                        const std::string& hyp_line,
                                        std::size_t sentence_index,
                                        const Lexicon* lexicon) {
  SentenceJudgement out;
  TokenSequence hyp = tokenize(hyp_line);
  std::vector<Edit> hyp_edits = extract_edits(rec.source, hyp);
  for (const Edit& e : hyp_edits) {
    if (flag_suspect_edit(e, rec.source)) {
      EditDiagnostic d;
      d.sentence = sentence_index;
      d.start = e.start;
      d.end = e.end;
      d.category = classify_edit(e, rec.source, lexicon);
      d.flag = kSuspectFlag;
      out.diagnostics.push_back(std::move(d));
    }
  }
  for (const auto& [id, gold_edits] : rec.annotators) {
    SentenceJudgement::PerAnnotator pa;
    pa.id = id;
    pa.matched.assign(gold_edits.size(), false);
    for (const Edit& g : gold_edits) pa.gold.push_back(&g);
    std::uint64_t tp = 0;
    for (const Edit& h : hyp_edits) {
      bool hit = false;
      for (std::size_t gi = 0; gi < gold_edits.size(); ++gi) {
        const Edit& g = gold_edits[gi];
        if (!pa.matched[gi] && g.start == h.start && g.end == h.end &&
            g.correction == h.correction) {
          pa.matched[gi] = true;
          hit = true;
          break;
        }
      }
      if (hit) ++tp;
    }
    pa.counts.tp = tp;
    pa.counts.fp = hyp_edits.size() - tp;
    pa.counts.fn = gold_edits.size() - tp;
    out.annotators.push_back(std::move(pa));
  }
  return out;
}

inline double f_half_of_counts(const SentenceCounts& c) {
  return f_half_of(precision_of(c.tp, c.fp), recall_of(c.tp, c.fn));
}

}  // namespace detail

inline ScoreReport score(const std::vector<M2Record>& gold,
                         const std::vector<std::string>& hypotheses,
                         const ScoreOptions& options = {}) {
  if (gold.size() != hypotheses.size())
    throw LengthMismatch("gold has " + std::to_string(gold.size()) +
                         " sentences, hypothesis has " +
                         std::to_string(hypotheses.size()));
  const std::size_t n = gold.size();
  std::vector<detail::SentenceJudgement> judged(n);
  int threads = options.threads;
  if (threads <= 0)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (threads > 1 && n > 1) {
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t lo = chunk * t, hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i)
          judged[i] = detail::judge_sentence(gold[i], hypotheses[i], i,
                                             options.lexicon);
      });
    }
    for (std::thread& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < n; ++i)
      judged[i] = detail::judge_sentence(gold[i], hypotheses[i], i, options.lexicon);
  }

  ScoreReport report;
  report.per_sentence.resize(n);
  SentenceCounts running;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sj = judged[i];
    const detail::SentenceJudgement::PerAnnotator* best = nullptr;
    double best_f = -1.0;
    for (const auto& pa : sj.annotators) {
      SentenceCounts eval = pa.counts;
      if (options.cumulative_annotator) {
        eval.tp += running.tp;
        eval.fp += running.fp;
        eval.fn += running.fn;
      }
      double f = detail::f_half_of_counts(eval);
      if (f > best_f) {  // annotator ids iterate ascending, ties keep the first
        best_f = f;
        best = &pa;
      }
    }
    report.per_sentence[i] = best->counts;
    running.tp += best->counts.tp;
    running.fp += best->counts.fp;
    running.fn += best->counts.fn;
    for (std::size_t gi = 0; gi < best->gold.size(); ++gi) {
      CategoryCount& cc = report.per_category[best->gold[gi]->category];
      cc.total += 1;
      if (best->matched[gi]) cc.matched += 1;
    }
    for (const EditDiagnostic& d : sj.diagnostics)
      report.diagnostics.push_back(d);
  }
  report.tp = running.tp;
  report.fp = running.fp;
  report.fn = running.fn;
  return report;
}

struct CategoryRow {
  std::string category;
  std::uint64_t matched = 0, total = 0;
  double recall = 0.0;
};

// rows sorted by gold-edit count descending, ties by name
inline std::vector<CategoryRow> category_recall_table(const ScoreReport& report) {
  std::vector<CategoryRow> rows;
  for (const auto& [cat, cc] : report.per_category)
    rows.push_back({cat, cc.matched, cc.total, cc.recall()});
  std::sort(rows.begin(), rows.end(), [](const CategoryRow& a, const CategoryRow& b) {
    return a.total != b.total ? a.total > b.total : a.category < b.category;
  });
  return rows;
}

inline double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

inline nlohmann::json report_to_json(const ScoreReport& report) {
  nlohmann::json j;
  j["counts"] = {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}};
  j["precision"] = round4(report.precision());
  j["recall"] = round4(report.recall());
  j["f05"] = round4(report.f_half());
  j["categories"] = nlohmann::json::array();
  for (const CategoryRow& row : category_recall_table(report)) {
    j["categories"].push_back({{"category", row.category},
                               {"matched", row.matched},
                               {"total", row.total},
                               {"recall", round4(row.recall)}});
  }
  j["sentences"] = nlohmann::json::array();
  for (const SentenceCounts& c : report.per_sentence)
    j["sentences"].push_back({c.tp, c.fp, c.fn});
  j["diagnostics"] = nlohmann::json::array();
  for (const EditDiagnostic& d : report.diagnostics) {
    j["diagnostics"].push_back({{"sentence", d.sentence},
                                {"start", d.start},
                                {"end", d.end},
                                {"category", d.category},
                                {"flag", d.flag}});
  }
  return j;
}

}  // namespace gectk
