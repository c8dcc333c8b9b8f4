#pragma once

// File-to-file operations shared by the command-line tool and the pipeline
// runner. Each run_* function loads its inputs, calls the library, writes its
// outputs, and returns a small summary for logging and manifests. Paths are
// taken as given; relative ones resolve against the working directory.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gectk/align.hpp"
#include "gectk/bootstrap.hpp"
#include "gectk/classify.hpp"
#include "gectk/confusion.hpp"
#include "gectk/learned_channel.hpp"
#include "gectk/m2.hpp"
#include "gectk/prob_channel.hpp"
#include "gectk/score.hpp"
#include "gectk/text.hpp"

namespace gectk {

struct SampleParams {
  std::string in;
  std::string out;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

struct SampleSummary {
  std::size_t lines_in = 0;
  std::size_t lines_out = 0;
};

inline SampleSummary run_sample(const SampleParams& p) {
  Corpus c = load_corpus(p.in);
  Corpus out = sample_corpus(c, p.count, p.seed);
  save_corpus(out, p.out);
  return {c.size(), out.size()};
}

struct SynthProbParams {
  std::string in;
  std::string out;
  std::string wordlist;  // optional "form TAB count" list for substitutions
  NoiseConfig noise;
  int threads = 1;
};

struct SynthProbSummary {
  NoiseStats stats;
  std::size_t lines = 0;
};

inline SynthProbSummary run_synth_prob(const SynthProbParams& p) {
  Corpus clean = load_corpus(p.in);
  ConfusionIndex idx;
  if (!p.wordlist.empty()) idx = ConfusionIndex::from_file(p.wordlist);
  SynthProbSummary s;
  ParallelCorpus noised =
      noise_corpus(clean, p.noise, idx, p.threads, &s.stats);
  save_parallel(noised, p.out);
  s.lines = noised.size();
  return s;
}

struct SynthLearnedParams {
  std::string in;
  std::string channel;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SynthLearnedSummary {
  CorruptStats stats;
  std::size_t lines = 0;
};

inline SynthLearnedSummary run_synth_learned(const SynthLearnedParams& p) {
  Corpus clean = load_corpus(p.in);
  ErrorChannelModel model = load_channel_file(p.channel);
  SynthLearnedSummary s;
  ParallelCorpus corrupted =
      corrupt_corpus(clean, model, p.seed, p.threads, &s.stats);
  save_parallel(corrupted, p.out);
  s.lines = corrupted.size();
  return s;
}

struct FitChannelParams {
  std::string in;
  std::string out;
  std::uint64_t min_count = 1;
};

struct FitChannelSummary {
  std::size_t sentences = 0;
  std::uint64_t edits = 0;
  std::size_t categories = 0;
};

inline FitChannelSummary run_fit_channel(const FitChannelParams& p) {
  std::vector<M2Record> gold = load_m2(p.in);
  ErrorChannelModel model = fit_channel(gold, p.min_count);
  save_channel_file(model, p.out);
  return {model.sentences, model.total_edits(), model.categories.size()};
}

struct ExtractParams {
  std::string in;       // two-column TSV, errorful TAB clean
  std::string out;      // annotation records
  std::string tgt_out;  // optional, clean side as plain text
  std::string lexicon;  // optional, refines edit categories
  int annotator = 0;
};

struct ExtractSummary {
  std::size_t sentences = 0;
  std::uint64_t edits = 0;
};

inline ExtractSummary run_extract_edits(const ExtractParams& p) {
  ParallelCorpus pairs = load_parallel(p.in);
  Lexicon lex;
  if (!p.lexicon.empty()) lex = Lexicon::load(p.lexicon);
  const Lexicon* lex_ptr = p.lexicon.empty() ? nullptr : &lex;

  ExtractSummary s;
  std::vector<M2Record> records;
  records.reserve(pairs.size());
  for (const auto& [src_line, tgt_line] : pairs.pairs) {
    M2Record rec;
    rec.source = tokenize(src_line);
    TokenSequence tgt = tokenize(tgt_line);
    std::vector<Edit> edits = extract_edits(rec.source, tgt);
    for (Edit& e : edits) {
      e.category = classify_edit(e, rec.source, lex_ptr);
      e.annotator = p.annotator;
    }
    s.edits += edits.size();
    rec.annotators[p.annotator] = std::move(edits);
    records.push_back(std::move(rec));
  }
  save_m2(records, p.out);
  s.sentences = records.size();

  if (!p.tgt_out.empty()) {
    Corpus clean;
    for (const auto& [src_line, tgt_line] : pairs.pairs)
      clean.lines.push_back(tgt_line);
    save_corpus(clean, p.tgt_out);
  }
  return s;
}

struct ClassifyParams {
  std::string in;
  std::string out;
  std::string lexicon;  // optional
};

struct ClassifySummary {
  std::size_t sentences = 0;
  std::uint64_t edits = 0;
  std::uint64_t relabeled = 0;
};

inline ClassifySummary run_classify(const ClassifyParams& p) {
  std::vector<M2Record> records = load_m2(p.in);
  Lexicon lex;
  if (!p.lexicon.empty()) lex = Lexicon::load(p.lexicon);
  const Lexicon* lex_ptr = p.lexicon.empty() ? nullptr : &lex;

  ClassifySummary s;
  s.sentences = records.size();
  for (M2Record& rec : records) {
    for (auto& [id, edits] : rec.annotators) {
      for (Edit& e : edits) {
        ++s.edits;
        std::string fresh = classify_edit(e, rec.source, lex_ptr);
        if (fresh != e.category) {
          e.category = std::move(fresh);
          ++s.relabeled;
        }
      }
    }
  }
  save_m2(records, p.out);
  return s;
}

struct ScoreParams {
  std::string gold;
  std::string hyp;
  std::string report_out;  // optional JSON destination
  std::string lexicon;     // optional, labels diagnostics
  bool cumulative = false;
  int threads = 1;
};

inline ScoreReport run_score(const ScoreParams& p) {
  std::vector<M2Record> gold = load_m2(p.gold);
  Corpus hyp = load_corpus(p.hyp);
  Lexicon lex;
  ScoreOptions opt;
  opt.cumulative_annotator = p.cumulative;
  opt.threads = p.threads;
  if (!p.lexicon.empty()) {
    lex = Lexicon::load(p.lexicon);
    opt.lexicon = &lex;
  }
  ScoreReport report = score(gold, hyp.lines, opt);
  if (!p.report_out.empty())
    write_file(p.report_out, report_to_json(report).dump(2) + "\n");
  return report;
}

struct CompareParams {
  std::string gold;
  std::string hyp_a;
  std::string hyp_b;
  std::string report_out;  // optional JSON destination
  std::uint64_t samples = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct CompareSummary {
  BootstrapResult boot;
  ScoreReport report_a;
  ScoreReport report_b;
};

inline nlohmann::json compare_to_json(const CompareSummary& s) {
  nlohmann::json j;
  j["a"] = report_to_json(s.report_a);
  j["b"] = report_to_json(s.report_b);
  j["delta_f05"] = round4(s.boot.delta_f_half);
  j["p_value"] = round4(s.boot.p_value);
  j["alpha"] = s.boot.alpha;
  j["significant"] = s.boot.significant;
  j["exhaustive"] = s.boot.exhaustive;
  j["samples"] = s.boot.samples;
  return j;
}

inline CompareSummary run_compare(const CompareParams& p) {
  std::vector<M2Record> gold = load_m2(p.gold);
  Corpus a = load_corpus(p.hyp_a);
  Corpus b = load_corpus(p.hyp_b);
  CompareSummary s;
  s.boot = compare_systems(gold, a.lines, b.lines, p.samples, p.alpha, p.seed,
                           p.threads, &s.report_a, &s.report_b);
  if (!p.report_out.empty())
    write_file(p.report_out, compare_to_json(s).dump(2) + "\n");
  return s;
}

}  // namespace gectk
