// Command-line front end. Every subcommand is a thin wrapper over the
// library; data goes to the named output files, progress goes to stderr,
// and the exit code is 0 on success, 1 on any domain failure, 2 on bad
// usage.

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gectk/commands.hpp"
#include "gectk/log.hpp"
#include "gectk/pipeline.hpp"
#include "gectk/remote.hpp"
#include "gectk/version.hpp"

namespace {

void print_report(const gectk::ScoreReport& report) {
  std::cout << "tp " << report.tp << "  fp " << report.fp << "  fn "
            << report.fn << "\n";
  std::cout << "precision " << gectk::round4(report.precision())
            << "  recall " << gectk::round4(report.recall()) << "  f05 "
            << gectk::round4(report.f_half()) << "\n";
  auto rows = gectk::category_recall_table(report);
  if (!rows.empty()) std::cout << "category recall:\n";
  for (const auto& row : rows)
    std::cout << "  " << row.category << "  " << row.matched << "/"
              << row.total << "  " << gectk::round4(row.recall) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  using gectk::LogLevel;

  CLI::App app{"error generation and evaluation toolkit for grammatical "
               "error correction"};
  app.set_version_flag("--version", std::string("gectk ") + gectk::kVersion);
  app.require_subcommand(1);
  std::function<int()> action;

  // sample
  gectk::SampleParams sample;
  {
    CLI::App* c = app.add_subcommand(
        "sample", "draw a uniform line sample from a corpus");
    c->add_option("--in", sample.in, "input corpus, one sentence per line")
        ->required();
    c->add_option("--out", sample.out, "where to write the sample")
        ->required();
    c->add_option("--count", sample.count, "number of lines to keep")
        ->required();
    c->add_option("--seed", sample.seed, "sampling seed");
    c->callback([&]() {
      action = [&]() {
        auto s = gectk::run_sample(sample);
        gectk::log(LogLevel::Info, "sample",
                   "kept " + std::to_string(s.lines_out) + " of " +
                       std::to_string(s.lines_in) + " lines");
        return 0;
      };
    });
  }

  CLI::App* synth = app.add_subcommand(
      "synthesize", "turn a clean corpus into (errorful, clean) pairs");
  synth->require_subcommand(1);

  // synthesize prob
  gectk::SynthProbParams prob;
  std::vector<double> prob_op_weights, prob_char_weights;
  {
    CLI::App* c = synth->add_subcommand(
        "prob", "probabilistic word- and character-level noise");
    c->add_option("--in", prob.in, "clean corpus")->required();
    c->add_option("--out", prob.out, "output TSV, errorful TAB clean")
        ->required();
    c->add_option("--wordlist", prob.wordlist,
                  "form TAB count list powering in-vocabulary substitutions");
    c->add_option("--p-word", prob.noise.p_word,
                  "per-token perturbation probability");
    c->add_option("--p-char", prob.noise.p_char,
                  "per-character perturbation probability");
    c->add_option("--op-weights", prob_op_weights,
                  "word op weights: substitute delete insert swap recase")
        ->expected(5);
    c->add_option("--char-op-weights", prob_char_weights,
                  "char op weights: insert delete substitute swap")
        ->expected(4);
    c->add_option("--seed", prob.noise.seed, "noise seed");
    c->add_option("--threads", prob.threads, "worker threads");
    c->callback([&]() {
      action = [&]() {
        if (!prob_op_weights.empty()) prob.noise.op_weights = prob_op_weights;
        if (!prob_char_weights.empty())
          prob.noise.char_op_weights = prob_char_weights;
        auto s = gectk::run_synth_prob(prob);
        gectk::log(LogLevel::Info, "synthesize-prob",
                   "perturbed " + std::to_string(s.stats.perturbed) + " of " +
                       std::to_string(s.stats.tokens) + " tokens over " +
                       std::to_string(s.lines) + " lines");
        return 0;
      };
    });
  }

  // synthesize learned
  gectk::SynthLearnedParams learned;
  {
    CLI::App* c = synth->add_subcommand(
        "learned", "replay an error channel fit on gold annotations");
    c->add_option("--in", learned.in, "clean corpus")->required();
    c->add_option("--channel", learned.channel, "fitted channel file")
        ->required();
    c->add_option("--out", learned.out, "output TSV, errorful TAB clean")
        ->required();
    c->add_option("--seed", learned.seed, "corruption seed");
    c->add_option("--threads", learned.threads, "worker threads");
    c->callback([&]() {
      action = [&]() {
        auto s = gectk::run_synth_learned(learned);
        gectk::log(
            LogLevel::Info, "synthesize-learned",
            "applied " + std::to_string(s.stats.drawn - s.stats.skipped) +
                " edits, skipped " + std::to_string(s.stats.skipped) +
                ", over " + std::to_string(s.lines) + " lines");
        return 0;
      };
    });
  }

  // synthesize remote
  struct {
    std::string in, out, pool, template_name = "et", template_file;
    std::uint64_t seed = 0;
    gectk::RemoteConfig cfg;
    std::vector<std::string> refusals;
  } remote;
  {
    CLI::App* c = synth->add_subcommand(
        "remote", "few-shot generation through a chat-completion endpoint");
    c->add_option("--in", remote.in, "clean corpus")->required();
    c->add_option("--out", remote.out, "output TSV, errorful TAB clean")
        ->required();
    c->add_option("--pool", remote.pool,
                  "gold TSV the few-shot examples are drawn from")
        ->required();
    c->add_option("--template", remote.template_name,
                  "built-in prompt template: et, de, or uk");
    c->add_option("--template-file", remote.template_file,
                  "custom prompt template JSON, overrides --template");
    c->add_option("--endpoint", remote.cfg.endpoint, "API base URL");
    c->add_option("--model", remote.cfg.model, "model name");
    c->add_option("--temperature", remote.cfg.temperature,
                  "sampling temperature");
    c->add_option("--top-p", remote.cfg.top_p,
                  "nucleus sampling cutoff; negative leaves the default");
    c->add_option("--concurrency", remote.cfg.concurrency,
                  "parallel requests");
    c->add_option("--max-attempts", remote.cfg.max_attempts,
                  "tries per sentence before falling back");
    c->add_option("--backoff-ms", remote.cfg.backoff_base_ms,
                  "base retry backoff in milliseconds");
    c->add_option("--timeout-ms", remote.cfg.timeout_ms,
                  "per-request timeout in milliseconds");
    c->add_option("--api-key-env", remote.cfg.api_key_env,
                  "environment variable holding the API key");
    c->add_option("--journal", remote.cfg.journal_dir,
                  "directory for the response journal");
    c->add_option("--refusal", remote.refusals,
                  "phrase marking a refusal; repeatable, replaces defaults");
    c->add_option("--seed", remote.seed, "example sampling seed");
    c->callback([&]() {
      action = [&]() {
        if (!remote.refusals.empty())
          remote.cfg.refusal_phrases = remote.refusals;
        gectk::PromptTemplate tmpl =
            remote.template_file.empty()
                ? gectk::builtin_prompt_template(remote.template_name)
                : gectk::load_prompt_template(remote.template_file);
        gectk::Corpus clean = gectk::load_corpus(remote.in);
        gectk::ParallelCorpus pool = gectk::load_parallel(remote.pool);
        gectk::RemoteRunResult r = gectk::generate_remote(
            clean, remote.cfg, tmpl, pool, remote.seed);
        gectk::save_parallel(r.pairs, remote.out);
        gectk::log(LogLevel::Info, "synthesize-remote",
                   std::to_string(r.requested) + " requests, " +
                       std::to_string(r.from_journal) + " from journal, " +
                       std::to_string(r.failed) + " failed");
        if (r.failed > 0)
          gectk::log(LogLevel::Warn, "synthesize-remote",
                     std::to_string(r.failed) +
                         " sentences fell back to identity pairs");
        return 0;
      };
    });
  }

  // fit-channel
  gectk::FitChannelParams fit;
  {
    CLI::App* c = app.add_subcommand(
        "fit-channel", "fit an error channel on gold annotations");
    c->add_option("--in", fit.in, "gold annotation file")->required();
    c->add_option("--out", fit.out, "where to write the channel")->required();
    c->add_option("--min-count", fit.min_count,
                  "drop patterns seen fewer times than this");
    c->callback([&]() {
      action = [&]() {
        auto s = gectk::run_fit_channel(fit);
        gectk::log(LogLevel::Info, "fit-channel",
                   "fit " + std::to_string(s.edits) + " edits in " +
                       std::to_string(s.categories) + " categories from " +
                       std::to_string(s.sentences) + " sentences");
        return 0;
      };
    });
  }

  // extract-edits
  gectk::ExtractParams extract;
  {
    CLI::App* c = app.add_subcommand(
        "extract-edits",
        "align (errorful, clean) pairs into annotation records");
    c->add_option("--in", extract.in, "TSV of errorful TAB clean")
        ->required();
    c->add_option("--out", extract.out, "annotation output")->required();
    c->add_option("--tgt-out", extract.tgt_out,
                  "also write the clean side as plain text");
    c->add_option("--lexicon", extract.lexicon,
                  "surface TAB lemma TAB pos list refining categories");
    c->add_option("--annotator", extract.annotator, "annotator id to emit");
    c->callback([&]() {
      action = [&]() {
        auto s = gectk::run_extract_edits(extract);
        gectk::log(LogLevel::Info, "extract-edits",
                   "extracted " + std::to_string(s.edits) + " edits from " +
                       std::to_string(s.sentences) + " sentences");
        return 0;
      };
    });
  }

  // classify
  gectk::ClassifyParams classify;
  {
    CLI::App* c = app.add_subcommand(
        "classify", "recompute edit categories in an annotation file");
    c->add_option("--in", classify.in, "annotation input")->required();
    c->add_option("--out", classify.out, "annotation output")->required();
    c->add_option("--lexicon", classify.lexicon,
                  "surface TAB lemma TAB pos list refining categories");
    c->callback([&]() {
      action = [&]() {
        auto s = gectk::run_classify(classify);
        gectk::log(LogLevel::Info, "classify",
                   "relabeled " + std::to_string(s.relabeled) + " of " +
                       std::to_string(s.edits) + " edits");
        return 0;
      };
    });
  }

  // score
  gectk::ScoreParams score;
  {
    CLI::App* c = app.add_subcommand(
        "score", "score a hypothesis corpus against gold annotations");
    c->add_option("--gold", score.gold, "gold annotation file")->required();
    c->add_option("--hyp", score.hyp, "hypothesis corpus, one line each")
        ->required();
    c->add_option("--report", score.report_out, "write a JSON report here");
    c->add_option("--lexicon", score.lexicon,
                  "lexicon for labeling diagnostics");
    c->add_flag("--cumulative", score.cumulative,
                "pick annotators by cumulative rather than sentence F0.5");
    c->add_option("--threads", score.threads, "worker threads");
    c->callback([&]() {
      action = [&]() {
        gectk::ScoreReport report = gectk::run_score(score);
        print_report(report);
        gectk::log(LogLevel::Info, "score",
                   "scored " + std::to_string(report.per_sentence.size()) +
                       " sentences");
        return 0;
      };
    });
  }

  // compare
  gectk::CompareParams compare;
  {
    CLI::App* c = app.add_subcommand(
        "compare",
        "paired bootstrap significance test between two hypotheses");
    c->add_option("--gold", compare.gold, "gold annotation file")->required();
    c->add_option("--hyp-a", compare.hyp_a, "first hypothesis corpus")
        ->required();
    c->add_option("--hyp-b", compare.hyp_b, "second hypothesis corpus")
        ->required();
    c->add_option("--report", compare.report_out, "write a JSON report here");
    c->add_option("--samples", compare.samples, "bootstrap resamples");
    c->add_option("--alpha", compare.alpha, "significance level");
    c->add_option("--seed", compare.seed, "resampling seed");
    c->add_option("--threads", compare.threads, "worker threads");
    c->callback([&]() {
      action = [&]() {
        gectk::CompareSummary s = gectk::run_compare(compare);
        std::cout << "f05 a " << gectk::round4(s.report_a.f_half()) << "  b "
                  << gectk::round4(s.report_b.f_half()) << "\n";
        std::cout << "delta " << gectk::round4(s.boot.delta_f_half) << "  p "
                  << gectk::round4(s.boot.p_value) << "  "
                  << (s.boot.significant ? "significant" : "not significant")
                  << (s.boot.exhaustive ? " (exhaustive)" : "") << "\n";
        return 0;
      };
    });
  }

  // pipeline
  std::string pipeline_config;
  {
    CLI::App* c = app.add_subcommand(
        "pipeline", "run a multi-step INI-configured workflow");
    c->add_option("config", pipeline_config, "pipeline configuration file")
        ->required();
    c->callback([&]() {
      action = [&]() {
        gectk::PipelineConfig cfg = gectk::load_pipeline(pipeline_config);
        gectk::PipelineRunResult r = gectk::run_pipeline(cfg);
        for (const gectk::StepRunRecord& step : r.steps)
          gectk::log(LogLevel::Info, step.op,
                     "step " + step.name + ": " + step.summary + " (" +
                         std::to_string(step.wall_ms) + " ms)");
        gectk::log(LogLevel::Info, "pipeline",
                   "ran " + std::to_string(r.steps.size()) + " steps");
        return 0;
      };
    });
  }

  // validate
  std::string validate_config;
  {
    CLI::App* c = app.add_subcommand(
        "validate", "check a pipeline configuration without running it");
    c->add_option("config", validate_config, "pipeline configuration file")
        ->required();
    c->callback([&]() {
      action = [&]() {
        gectk::PipelineConfig cfg = gectk::load_pipeline(validate_config);
        std::vector<gectk::PipelineIssue> issues =
            gectk::validate_pipeline(cfg);
        for (const gectk::PipelineIssue& issue : issues) {
          std::cout << (issue.step.empty() ? std::string("pipeline")
                                           : "step " + issue.step);
          if (!issue.key.empty()) std::cout << " key " << issue.key;
          std::cout << ": " << issue.message << "\n";
        }
        if (issues.empty()) {
          std::cout << "ok: " << cfg.steps.size() << " steps\n";
          return 0;
        }
        gectk::log(LogLevel::Error, "validate",
                   std::to_string(issues.size()) + " problems found");
        return 1;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const gectk::AuthError& e) {
    gectk::log(LogLevel::Error, "auth", e.what());
    return 1;
  } catch (const gectk::Error& e) {
    gectk::log(LogLevel::Error, "run", e.what());
    return 1;
  } catch (const std::exception& e) {
    gectk::log(LogLevel::Error, "run", e.what());
    return 1;
  }
}
