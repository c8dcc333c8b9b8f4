#pragma once

// Declarative multi-step runs from an INI file:
//
//   [pipeline]
//   seed = 42
//   threads = 2
//   manifest = run.json
//
//   [step sample1k]
//   op = sample
//   in = corpus.txt
//   out = sample.txt
//   count = 1000
//
//   [step noise]
//   op = synthesize-prob
//   in = @sample1k
//   out = noised.tsv
//
// A value of @NAME in an input slot means "the out file of step NAME"; those
// references define the execution order. validate_pipeline reports every
// problem it can find without running anything; run_pipeline refuses to start
// while any issue stands, then executes the steps and records a manifest with
// a checksum of every input and output file.
//
// Only offline operations are allowed here. Network generation runs through
// its own command, where interrupting and resuming are first-class, and its
// journal makes a rerun reproducible; a pipeline rerun must never silently
// spend API money.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gectk/commands.hpp"
#include "gectk/errors.hpp"
#include "gectk/rng.hpp"
#include "gectk/text.hpp"

namespace gectk {

struct PipelineStep {
  std::string name;
  std::string op;
  std::map<std::string, std::string> args;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string manifest;
  std::vector<PipelineStep> steps;
  std::string raw_text;  // verbatim config, hashed into the manifest
};

namespace detail {

inline std::string trim_ini(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline PipelineConfig parse_pipeline(const std::string& text) {
  PipelineConfig cfg;
  cfg.raw_text = text;

  enum class Section { None, Pipeline, Step };
  Section section = Section::None;
  PipelineStep* step = nullptr;
  std::set<std::string> seen_names;

  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find('\n', pos);
    std::string line = (next == std::string::npos)
                           ? text.substr(pos)
                           : text.substr(pos, next - pos);
    pos = (next == std::string::npos) ? text.size() + 1 : next + 1;
    ++line_no;

    line = detail::trim_ini(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unterminated section header");
      std::string header = detail::trim_ini(line.substr(1, line.size() - 2));
      if (header == "pipeline") {
        section = Section::Pipeline;
        step = nullptr;
      } else if (header.rfind("step", 0) == 0) {
        std::string name = detail::trim_ini(header.substr(4));
        if (name.empty())
          throw ConfigError("line " + std::to_string(line_no) +
                            ": step section needs a name");
        if (!seen_names.insert(name).second)
          throw ConfigError("line " + std::to_string(line_no) +
                            ": duplicate step name " + name);
        cfg.steps.push_back({name, "", {}});
        step = &cfg.steps.back();
        section = Section::Step;
      } else {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown section [" + header + "]");
      }
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = detail::trim_ini(line.substr(0, eq));
    std::string value = detail::trim_ini(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");

    if (section == Section::None)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": key outside any section");
    if (section == Section::Pipeline) {
      try {
        if (key == "seed")
          cfg.seed = std::stoull(value);
        else if (key == "threads")
          cfg.threads = std::stoi(value);
        else if (key == "manifest")
          cfg.manifest = value;
        else
          throw ConfigError("line " + std::to_string(line_no) +
                            ": unknown pipeline key " + key);
      } catch (const std::logic_error&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad value '" +
                          value + "' for " + key);
      }
      continue;
    }

    if (key == "op") {
      step->op = value;
    } else if (!step->args.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": duplicate key " + key + " in step " + step->name);
    }
  }
  return cfg;
}

inline PipelineConfig load_pipeline(const std::string& path) {
  return parse_pipeline(read_file(path));
}

struct PipelineIssue {
  std::string step;  // empty for whole-pipeline problems
  std::string key;   // offending key where one exists
  std::string message;
};

namespace detail {

struct OpSpec {
  std::vector<std::string> required_inputs;
  std::vector<std::string> optional_inputs;
  std::vector<std::string> required_outputs;
  std::vector<std::string> optional_outputs;
  std::vector<std::string> scalars;
  std::vector<std::string> required_scalars;
};

inline const std::map<std::string, OpSpec>& op_specs() {
  static const std::map<std::string, OpSpec> specs = {
      {"sample", {{"in"}, {}, {"out"}, {}, {"seed"}, {"count"}}},
      {"synthesize-prob",
       {{"in"},
        {"wordlist"},
        {"out"},
        {},
        {"p-word", "p-char", "seed", "threads"},
        {}}},
      {"synthesize-learned",
       {{"in", "channel"}, {}, {"out"}, {}, {"seed", "threads"}, {}}},
      {"fit-channel", {{"in"}, {}, {"out"}, {}, {"min-count"}, {}}},
      {"extract-edits",
       {{"in"}, {"lexicon"}, {"out"}, {"tgt-out"}, {"annotator"}, {}}},
      {"classify", {{"in"}, {"lexicon"}, {"out"}, {}, {}, {}}},
      {"score",
       {{"gold", "hyp"},
        {"lexicon"},
        {"out"},
        {},
        {"cumulative", "threads"},
        {}}},
      {"compare",
       {{"gold", "hyp-a", "hyp-b"},
        {},
        {"out"},
        {},
        {"samples", "alpha", "seed", "threads"},
        {}}},
  };
  return specs;
}

inline bool is_ref(const std::string& value) {
  return !value.empty() && value[0] == '@';
}

inline std::uint64_t parse_u64_arg(const std::string& value) {
  std::size_t used = 0;
  std::uint64_t v = std::stoull(value, &used);
  if (used != value.size()) throw std::invalid_argument(value);
  return v;
}

inline double parse_double_arg(const std::string& value) {
  std::size_t used = 0;
  double v = std::stod(value, &used);
  if (used != value.size()) throw std::invalid_argument(value);
  return v;
}

inline bool parse_bool_arg(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument(value);
}

// Outputs and the edges they induce. A step depends on another either through
// an explicit @reference or by naming, verbatim, a file the other step
// declares as an output.
struct DepGraph {
  std::map<std::string, std::size_t> produced_by;  // output path -> step
  std::vector<std::vector<std::size_t>> deps;
  std::vector<PipelineIssue> issues;
};

inline DepGraph dependency_graph(const PipelineConfig& cfg) {
  DepGraph g;
  g.deps.resize(cfg.steps.size());
  const auto& specs = op_specs();
  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < cfg.steps.size(); ++i)
    by_name[cfg.steps[i].name] = i;

  for (std::size_t i = 0; i < cfg.steps.size(); ++i) {
    const PipelineStep& s = cfg.steps[i];
    auto spec_it = specs.find(s.op);
    if (spec_it == specs.end()) continue;
    for (const auto& list :
         {spec_it->second.required_outputs, spec_it->second.optional_outputs}) {
      for (const std::string& key : list) {
        auto it = s.args.find(key);
        if (it == s.args.end() || is_ref(it->second)) continue;
        auto [slot, fresh] = g.produced_by.emplace(it->second, i);
        if (!fresh)
          g.issues.push_back({s.name, key,
                              "output file " + it->second +
                                  " is already written by step " +
                                  cfg.steps[slot->second].name});
      }
    }
  }

  for (std::size_t i = 0; i < cfg.steps.size(); ++i) {
    const PipelineStep& s = cfg.steps[i];
    auto spec_it = specs.find(s.op);
    if (spec_it == specs.end()) continue;
    for (const auto& list :
         {spec_it->second.required_inputs, spec_it->second.optional_inputs}) {
      for (const std::string& key : list) {
        auto it = s.args.find(key);
        if (it == s.args.end()) continue;
        const std::string& value = it->second;
        if (is_ref(value)) {
          auto t = by_name.find(value.substr(1));
          if (t != by_name.end()) g.deps[i].push_back(t->second);
        } else if (auto p = g.produced_by.find(value);
                   p != g.produced_by.end()) {
          if (p->second == i)
            g.issues.push_back({s.name, key, "step reads its own output"});
          else
            g.deps[i].push_back(p->second);
        }
      }
    }
  }
  return g;
}

}  // namespace detail

inline std::vector<PipelineIssue> validate_pipeline(
    const PipelineConfig& cfg) {
  std::vector<PipelineIssue> issues;
  const auto& specs = detail::op_specs();
  detail::DepGraph graph = detail::dependency_graph(cfg);
  issues.insert(issues.end(), graph.issues.begin(), graph.issues.end());

  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < cfg.steps.size(); ++i)
    by_name[cfg.steps[i].name] = i;

  if (cfg.steps.empty())
    issues.push_back({"", "", "pipeline has no steps"});
  if (cfg.threads < 1)
    issues.push_back({"", "threads", "threads must be >= 1"});

  for (const PipelineStep& s : cfg.steps) {
    auto spec_it = specs.find(s.op);
    if (s.op.empty()) {
      issues.push_back({s.name, "op", "step has no op"});
      continue;
    }
    if (spec_it == specs.end()) {
      std::string msg = "unknown op '" + s.op + "'";
      if (s.op == "synthesize-remote")
        msg += " (network generation is not a pipeline step; run it as its "
               "own command)";
      issues.push_back({s.name, "op", msg});
      continue;
    }
    const detail::OpSpec& spec = spec_it->second;

    auto known = [&](const std::string& key) {
      for (const auto& list :
           {spec.required_inputs, spec.optional_inputs, spec.required_outputs,
            spec.optional_outputs, spec.scalars, spec.required_scalars})
        for (const std::string& k : list)
          if (k == key) return true;
      return false;
    };
    auto is_output_key = [&](const std::string& key) {
      for (const auto& list : {spec.required_outputs, spec.optional_outputs})
        for (const std::string& k : list)
          if (k == key) return true;
      return false;
    };

    for (const auto& [key, value] : s.args) {
      if (!known(key))
        issues.push_back({s.name, key, "unknown key for op " + s.op});
      else if (is_output_key(key) && detail::is_ref(value))
        issues.push_back({s.name, key, "an output cannot be a @reference"});
    }
    for (const std::string& key : spec.required_inputs)
      if (!s.args.count(key))
        issues.push_back({s.name, key, "missing required input"});
    for (const std::string& key : spec.required_outputs)
      if (!s.args.count(key))
        issues.push_back({s.name, key, "missing required output"});
    for (const std::string& key : spec.required_scalars)
      if (!s.args.count(key))
        issues.push_back({s.name, key, "missing required value"});

    // inputs must point at an existing file or a known step
    for (const auto& list : {spec.required_inputs, spec.optional_inputs}) {
      for (const std::string& key : list) {
        auto it = s.args.find(key);
        if (it == s.args.end()) continue;
        const std::string& value = it->second;
        if (detail::is_ref(value)) {
          std::string target = value.substr(1);
          auto t = by_name.find(target);
          if (t == by_name.end())
            issues.push_back(
                {s.name, key, "reference to unknown step @" + target});
          else if (!cfg.steps[t->second].args.count("out"))
            issues.push_back(
                {s.name, key, "step @" + target + " has no out to consume"});
        } else if (!graph.produced_by.count(value) &&
                   !std::filesystem::exists(value)) {
          issues.push_back({s.name, key, "input file not found: " + value});
        }
      }
    }

    // numeric arguments must parse, and probabilities must stay in range
    for (const char* key : {"count", "seed", "samples", "min-count",
                            "annotator", "threads"}) {
      auto it = s.args.find(key);
      if (it == s.args.end()) continue;
      try {
        detail::parse_u64_arg(it->second);
      } catch (const std::logic_error&) {
        issues.push_back(
            {s.name, key, "not a whole number: '" + it->second + "'"});
      }
    }
    for (const char* key : {"p-word", "p-char", "alpha"}) {
      auto it = s.args.find(key);
      if (it == s.args.end()) continue;
      try {
        double v = detail::parse_double_arg(it->second);
        if (v < 0.0 || v > 1.0)
          issues.push_back({s.name, key,
                            key + std::string(" must be in [0, 1], got ") +
                                it->second});
      } catch (const std::logic_error&) {
        issues.push_back(
            {s.name, key, "not a number: '" + it->second + "'"});
      }
    }
    if (auto it = s.args.find("cumulative"); it != s.args.end()) {
      try {
        detail::parse_bool_arg(it->second);
      } catch (const std::logic_error&) {
        issues.push_back({s.name, "cumulative",
                          "not a boolean: '" + it->second + "'"});
      }
    }
  }

  // cycle check over the dependency edges, tolerant of issues found above
  std::vector<int> state(cfg.steps.size(), 0);  // 0 new, 1 visiting, 2 done
  std::vector<std::size_t> stack;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    if (state[v] == 2) return;
    if (state[v] == 1) {
      std::string chain = cfg.steps[v].name;
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        chain += " <- " + cfg.steps[*it].name;
        if (*it == v) break;
      }
      issues.push_back({cfg.steps[v].name, "", "dependency cycle: " + chain});
      return;
    }
    state[v] = 1;
    stack.push_back(v);
    for (std::size_t d : graph.deps[v]) visit(d);
    stack.pop_back();
    state[v] = 2;
  };
  for (std::size_t i = 0; i < cfg.steps.size(); ++i) visit(i);

  return issues;
}

struct StepRunRecord {
  std::string name;
  std::string op;
  std::uint64_t wall_ms = 0;
  std::map<std::string, std::pair<std::string, std::string>> inputs;
  std::map<std::string, std::pair<std::string, std::string>> outputs;
  std::string summary;
};

struct PipelineRunResult {
  std::vector<StepRunRecord> steps;
  nlohmann::json manifest;
};

namespace detail {

inline std::string file_checksum(const std::string& path) {
  return hex64(fnv1a64(read_file(path)));
}

inline std::vector<std::size_t> execution_order(const PipelineConfig& cfg) {
  DepGraph graph = dependency_graph(cfg);
  std::vector<std::vector<std::size_t>> dependents(cfg.steps.size());
  std::vector<std::size_t> pending(cfg.steps.size(), 0);
  for (std::size_t i = 0; i < cfg.steps.size(); ++i) {
    for (std::size_t dep : graph.deps[i]) {
      dependents[dep].push_back(i);
      ++pending[i];
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < cfg.steps.size(); ++i)
    if (pending[i] == 0) ready.insert(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t d : dependents[i])
      if (--pending[d] == 0) ready.insert(d);
  }
  return order;  // validated configs are acyclic, so this covers every step
}

}  // namespace detail

inline PipelineRunResult run_pipeline(const PipelineConfig& cfg) {
  std::vector<PipelineIssue> issues = validate_pipeline(cfg);
  if (!issues.empty()) {
    std::string msg = "configuration has " + std::to_string(issues.size()) +
                      " problem(s); first: ";
    if (!issues[0].step.empty()) msg += "step " + issues[0].step + ", ";
    if (!issues[0].key.empty()) msg += "key " + issues[0].key + ": ";
    msg += issues[0].message;
    throw ConfigError(msg);
  }

  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < cfg.steps.size(); ++i)
    by_name[cfg.steps[i].name] = i;

  auto resolve = [&](const std::string& value) {
    if (!detail::is_ref(value)) return value;
    return cfg.steps[by_name.at(value.substr(1))].args.at("out");
  };
  auto arg_or = [&](const PipelineStep& s, const std::string& key,
                    const std::string& fallback) {
    auto it = s.args.find(key);
    return it == s.args.end() ? fallback : it->second;
  };

  PipelineRunResult result;
  for (std::size_t idx : detail::execution_order(cfg)) {
    const PipelineStep& s = cfg.steps[idx];
    StepRunRecord rec;
    rec.name = s.name;
    rec.op = s.op;

    const detail::OpSpec& spec = detail::op_specs().at(s.op);
    auto record_files =
        [&](const std::vector<std::string>& keys, bool required,
            std::map<std::string, std::pair<std::string, std::string>>& into) {
          for (const std::string& key : keys) {
            auto it = s.args.find(key);
            if (it == s.args.end()) {
              if (required)
                throw StepError(s.name, "missing " + key);
              continue;
            }
            std::string path = resolve(it->second);
            into[key] = {path, detail::file_checksum(path)};
          }
        };

    record_files(spec.required_inputs, true, rec.inputs);
    record_files(spec.optional_inputs, false, rec.inputs);

    std::uint64_t step_seed = s.args.count("seed")
                                  ? detail::parse_u64_arg(s.args.at("seed"))
                                  : mix64(cfg.seed, fnv1a64(s.name));
    int threads = static_cast<int>(detail::parse_u64_arg(
        arg_or(s, "threads", std::to_string(cfg.threads))));

    auto started = std::chrono::steady_clock::now();
    try {
      if (s.op == "sample") {
        SampleParams p;
        p.in = resolve(s.args.at("in"));
        p.out = s.args.at("out");
        p.count =
            static_cast<std::size_t>(detail::parse_u64_arg(s.args.at("count")));
        p.seed = step_seed;
        SampleSummary out = run_sample(p);
        rec.summary = "kept " + std::to_string(out.lines_out) + " of " +
                      std::to_string(out.lines_in) + " lines";
      } else if (s.op == "synthesize-prob") {
        SynthProbParams p;
        p.in = resolve(s.args.at("in"));
        p.out = s.args.at("out");
        if (s.args.count("wordlist")) p.wordlist = resolve(s.args.at("wordlist"));
        if (s.args.count("p-word"))
          p.noise.p_word = detail::parse_double_arg(s.args.at("p-word"));
        if (s.args.count("p-char"))
          p.noise.p_char = detail::parse_double_arg(s.args.at("p-char"));
        p.noise.seed = step_seed;
        p.threads = threads;
        SynthProbSummary out = run_synth_prob(p);
        rec.summary = "perturbed " + std::to_string(out.stats.perturbed) +
                      " of " + std::to_string(out.stats.tokens) + " tokens";
      } else if (s.op == "synthesize-learned") {
        SynthLearnedParams p;
        p.in = resolve(s.args.at("in"));
        p.channel = resolve(s.args.at("channel"));
        p.out = s.args.at("out");
        p.seed = step_seed;
        p.threads = threads;
        SynthLearnedSummary out = run_synth_learned(p);
        rec.summary = "applied " + std::to_string(out.stats.drawn -
                                                  out.stats.skipped) +
                      " edits over " + std::to_string(out.lines) + " lines";
      } else if (s.op == "fit-channel") {
        FitChannelParams p;
        p.in = resolve(s.args.at("in"));
        p.out = s.args.at("out");
        if (s.args.count("min-count"))
          p.min_count = detail::parse_u64_arg(s.args.at("min-count"));
        FitChannelSummary out = run_fit_channel(p);
        rec.summary = "fit " + std::to_string(out.edits) + " edits in " +
                      std::to_string(out.categories) + " categories";
      } else if (s.op == "extract-edits") {
        ExtractParams p;
        p.in = resolve(s.args.at("in"));
        p.out = s.args.at("out");
        if (s.args.count("tgt-out")) p.tgt_out = s.args.at("tgt-out");
        if (s.args.count("lexicon")) p.lexicon = resolve(s.args.at("lexicon"));
        if (s.args.count("annotator"))
          p.annotator = static_cast<int>(
              detail::parse_u64_arg(s.args.at("annotator")));
        ExtractSummary out = run_extract_edits(p);
        rec.summary = "extracted " + std::to_string(out.edits) +
                      " edits from " + std::to_string(out.sentences) +
                      " sentences";
      } else if (s.op == "classify") {
        ClassifyParams p;
        p.in = resolve(s.args.at("in"));
        p.out = s.args.at("out");
        if (s.args.count("lexicon")) p.lexicon = resolve(s.args.at("lexicon"));
        ClassifySummary out = run_classify(p);
        rec.summary = "relabeled " + std::to_string(out.relabeled) + " of " +
                      std::to_string(out.edits) + " edits";
      } else if (s.op == "score") {
        ScoreParams p;
        p.gold = resolve(s.args.at("gold"));
        p.hyp = resolve(s.args.at("hyp"));
        p.report_out = s.args.at("out");
        if (s.args.count("lexicon")) p.lexicon = resolve(s.args.at("lexicon"));
        if (s.args.count("cumulative"))
          p.cumulative = detail::parse_bool_arg(s.args.at("cumulative"));
        p.threads = threads;
        ScoreReport out = run_score(p);
        rec.summary = "f05 " + std::to_string(round4(out.f_half()));
      } else if (s.op == "compare") {
        CompareParams p;
        p.gold = resolve(s.args.at("gold"));
        p.hyp_a = resolve(s.args.at("hyp-a"));
        p.hyp_b = resolve(s.args.at("hyp-b"));
        p.report_out = s.args.at("out");
        if (s.args.count("samples"))
          p.samples = detail::parse_u64_arg(s.args.at("samples"));
        if (s.args.count("alpha"))
          p.alpha = detail::parse_double_arg(s.args.at("alpha"));
        p.seed = step_seed;
        p.threads = threads;
        CompareSummary out = run_compare(p);
        rec.summary = "p " + std::to_string(round4(out.boot.p_value));
      }
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(s.name, e.what());
    }
    auto ended = std::chrono::steady_clock::now();
    rec.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(ended - started)
            .count());

    try {
      record_files(spec.required_outputs, true, rec.outputs);
      record_files(spec.optional_outputs, false, rec.outputs);
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(s.name, e.what());
    }
    result.steps.push_back(std::move(rec));
  }

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["config_hash"] = hex64(fnv1a64(cfg.raw_text));
  manifest["seed"] = cfg.seed;
  manifest["steps"] = nlohmann::json::array();
  for (const StepRunRecord& rec : result.steps) {
    nlohmann::json js;
    js["name"] = rec.name;
    js["op"] = rec.op;
    js["wall_ms"] = rec.wall_ms;
    js["summary"] = rec.summary;
    js["inputs"] = nlohmann::json::object();
    for (const auto& [key, pc] : rec.inputs)
      js["inputs"][key] = {{"path", pc.first}, {"checksum", pc.second}};
    js["outputs"] = nlohmann::json::object();
    for (const auto& [key, pc] : rec.outputs)
      js["outputs"][key] = {{"path", pc.first}, {"checksum", pc.second}};
    manifest["steps"].push_back(std::move(js));
  }
  result.manifest = manifest;
  if (!cfg.manifest.empty())
    write_file(cfg.manifest, manifest.dump(2) + "\n");
  return result;
}

}  // namespace gectk
