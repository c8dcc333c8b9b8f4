#pragma once

// Few-shot error generation against an OpenAI-style chat-completion endpoint.
//
// Prompts follow a fixed shape: an instruction, four labeled
// (correct, incorrect) example pairs drawn from a gold pool, then the input
// sentence and a dangling output label for the model to complete. Built-in
// templates exist for Estonian, German, and Ukrainian; custom ones load from
// a small JSON file.
//
// Raw model output runs through post_process: strip echoed labels and
// wrapping quotes, flatten whitespace, then fall back to the input verbatim
// when the result is empty, wildly longer or shorter than the input, matches
// a refusal phrase, or is not valid UTF-8. The output corpus is therefore
// always line-aligned with the input, whatever the endpoint does.
//
// Successful raw responses are journaled per (model, temperature, prompt)
// key, so an interrupted run picks up where it stopped instead of re-paying
// for completed requests. The API key is read from an environment variable,
// never from flags or files. 401 and 403 abort the run; other failures retry
// with exponential backoff and finally fall back to an identity pair, with
// the sentence flagged.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "gectk/errors.hpp"
#include "gectk/rng.hpp"
#include "gectk/text.hpp"
#include "gectk/unicode.hpp"

namespace gectk {

struct PromptTemplate {
  std::string language;
  std::string instruction;
  std::string input_label;
  std::string output_label;
  std::size_t slots = 4;
};

// the instruction texts and field labels are part of the generation protocol
// and are reproduced verbatim
inline PromptTemplate builtin_prompt_template(const std::string& name) {
  PromptTemplate t;
  if (name == "et") {
    t.language = "et";
    t.instruction =
        "Muuda sisendteksti, genereerides sinna vigu, mida võib teha eesti "
        "keele õppija. Väljundtekstina tagasta sisendtekst, kuhu oled "
        "genereerinud vead. Sisendteksti genereeri õigekirja-, grammatika-, "
        "sõnavaliku-, sõnajärje-, kirjavahemärgi- ning stiilivigu. Kui "
        "sisendtekstis on vigu, siis ära neid paranda, vaid genereeri vigu "
        "juurde. Ülesande kohta on neli näidet:";
    t.input_label = "Sisendtekst:";
    t.output_label = "Väljundtekst:";
  } else if (name == "de") {
    t.language = "de";
    t.instruction =
        "Erzeugen Sie im Eingabetext Fehler, wie sie jemand, der Deutsch "
        "lernt, machen könnte. Geben Sie als Ausgabetext den Eingabetext "
        "zurück, in den Sie Fehler eingefügt haben. Erzeugen Sie "
        "Rechtschreib-, Grammatik-, Wortwahl-, Wortreihenfolge-, "
        "Zeichensetzungs- und Stilfehler im Eingabetext. Sollten im "
        "Eingabetext bereits Fehler vorhanden sein, korrigieren Sie diese "
        "nicht, sondern erzeugen Sie zusätzliche Fehler. Es gibt vier "
        "Beispiele für die Aufgabe:";
    t.input_label = "Eingabetext:";
    t.output_label = "Ausgabetext:";
  } else if (name == "uk") {
    t.language = "uk";
    t.instruction =
        "Змініть вхідний текст шляхом генерації в ньому помилок, які міг би "
        "зробити учень, що вивчає українську мову. На виході повертайте "
        "вхідний текст, у який ви внесли помилки. У вхідному тексті "
        "генеруйте помилки правопису, граматики, вибору слів, порядку слів, "
        "розділових знаків та стилю. Якщо у вхідному тексті є помилки, то не "
        "виправляйте їх, а генеруйте додаткові помилки. Далі наведені чотири "
        "приклади до цієї задачі";
    t.input_label = "Вхідний текст:";
    t.output_label = "Вихідний текст:";
  } else {
    throw ConfigError("no built-in prompt template named \"" + name +
                      "\" (have: et, de, uk)");
  }
  return t;
}

inline PromptTemplate load_prompt_template(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("template file " + path + " is not valid JSON: " +
                      e.what());
  }
  PromptTemplate t;
  try {
    t.instruction = j.at("instruction").get<std::string>();
    t.input_label = j.at("input_label").get<std::string>();
    t.output_label = j.at("output_label").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("template file " + path + " is missing a field: " +
                      e.what());
  }
  t.language = j.value("language", "");
  t.slots = j.value("slots", std::size_t{4});
  if (t.slots == 0)
    throw ConfigError("template file " + path + " declares zero slots");
  return t;
}

inline std::string render_prompt(
    const PromptTemplate& t,
    const std::vector<std::pair<std::string, std::string>>& examples,
    const std::string& input) {
  if (examples.size() != t.slots)
    throw SlotCountMismatch("template wants " + std::to_string(t.slots) +
                            " examples, got " +
                            std::to_string(examples.size()));
  std::string out = t.instruction;
  out += "\n";
  for (const auto& [correct, incorrect] : examples) {
    out += "\n";
    out += t.input_label + " " + correct + "\n";
    out += t.output_label + " " + incorrect + "\n";
  }
  out += "\n";
  out += t.input_label + " " + input + "\n";
  out += t.output_label;
  return out;
}

struct RemoteConfig {
  std::string endpoint = "https://api.openai.com";
  std::string model = "gpt-3.5-turbo";
  double temperature = 1.0;
  double top_p = -1.0;  // negative leaves the endpoint's default in place
  int concurrency = 4;
  int max_attempts = 3;
  int backoff_base_ms = 250;
  int timeout_ms = 30000;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string journal_dir;  // empty disables the response journal
  double min_length_ratio = 0.5;
  double max_length_ratio = 1.5;
  std::vector<std::string> refusal_phrases = {"I cannot", "I can't",
                                              "As an AI"};

  void validate() const {
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (min_length_ratio < 0.0 || max_length_ratio < min_length_ratio)
      throw ConfigError("length ratio bounds are inverted");
  }
};

namespace detail {

inline std::string trim_ws(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::size_t chunk_count(const std::string& s) {
  std::size_t n = 0;
  bool in_chunk = false;
  for (char c : s) {
    bool ws = c == ' ' || c == '\t' || c == '\r' || c == '\n';
    if (!ws && !in_chunk) ++n;
    in_chunk = !ws;
  }
  return n;
}

inline bool strip_wrapping_quotes(std::string& s) {
  static const std::pair<const char*, const char*> kPairs[] = {
      {"\"", "\""}, {"'", "'"},   {"„", "“"}, {"„", "”"},
      {"“", "”"}, {"‘", "’"}, {"«", "»"}};
  for (const auto& [open, close] : kPairs) {
    std::size_t ol = std::char_traits<char>::length(open);
    std::size_t cl = std::char_traits<char>::length(close);
    if (s.size() <= ol + cl) continue;
    if (s.compare(0, ol, open) == 0 &&
        s.compare(s.size() - cl, cl, close) == 0) {
      s = s.substr(ol, s.size() - ol - cl);
      return true;
    }
  }
  return false;
}

}  // namespace detail

// echo cleanup plus the replace-with-source fallbacks; always returns
// something line-shaped, and applying it twice changes nothing
inline std::string post_process(const std::string& input,
                                const std::string& raw,
                                const PromptTemplate& t,
                                const RemoteConfig& cfg) {
  if (raw == input) return input;
  std::string s = detail::trim_ws(raw);

  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const std::string& label : {t.output_label, t.input_label}) {
      if (!label.empty() && s.compare(0, label.size(), label) == 0) {
        s = detail::trim_ws(s.substr(label.size()));
        stripped = true;
      }
    }
    if (detail::strip_wrapping_quotes(s)) {
      s = detail::trim_ws(s);
      stripped = true;
    }
  }

  std::string flat;
  flat.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (c == '\n' || c == '\r' || c == '\t') {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      flat += ' ';
      pending_space = false;
    }
    flat += c;
  }
  s = std::move(flat);

  if (s.empty() || !valid_utf8(s)) return input;
  for (const std::string& phrase : cfg.refusal_phrases)
    if (!phrase.empty() && s.find(phrase) != std::string::npos) return input;
  double in_tokens = static_cast<double>(detail::chunk_count(input));
  double out_tokens = static_cast<double>(detail::chunk_count(s));
  if (in_tokens > 0) {
    double ratio = out_tokens / in_tokens;
    if (ratio < cfg.min_length_ratio || ratio > cfg.max_length_ratio)
      return input;
  }
  return s;
}

inline std::string journal_key(const RemoteConfig& cfg,
                               const std::string& prompt) {
  std::string material = cfg.model;
  material += '\x1f';
  material += std::to_string(cfg.temperature);
  material += '\x1f';
  material += prompt;
  return hex64(fnv1a64(material));
}

// append-only jsonl cache of raw responses, keyed by request content
class ResponseJournal {
 public:
  explicit ResponseJournal(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    std::ifstream in(file_path());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        nlohmann::json j = nlohmann::json::parse(line);
        entries_[j.at("key").get<std::string>()] =
            j.at("response").get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw FormatError("journal entry is not valid: " + file_path(),
                          line_no);
      }
    }
  }

  bool enabled() const { return !dir_.empty(); }
  std::size_t size() const { return entries_.size(); }

  bool lookup(const std::string& key, std::string& response) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    response = it->second;
    return true;
  }

  void record(const std::string& key, const std::string& response) {
    if (dir_.empty()) return;
    std::lock_guard<std::mutex> lock(mu_);
    if (!entries_.emplace(key, response).second) return;
    nlohmann::json j;
    j["key"] = key;
    j["response"] = response;
    std::ofstream out(file_path(), std::ios::app);
    out << j.dump() << "\n";
  }

  std::string file_path() const { return dir_ + "/responses.jsonl"; }

 private:
  std::string dir_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

namespace detail {

struct CompletionReply {
  bool ok = false;
  int status = 0;
  std::string content;
  std::string error;
};

class ChatClient {
 public:
  explicit ChatClient(const RemoteConfig& cfg) : cfg_(cfg) {
    std::size_t scheme_end = cfg.endpoint.find("://");
    if (scheme_end == std::string::npos)
      throw EndpointError("endpoint needs a scheme: " + cfg.endpoint);
    std::string scheme = cfg.endpoint.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
      throw EndpointError("unsupported endpoint scheme: " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https")
      throw EndpointError(
          "this build has no TLS support; use an http endpoint");
#endif
    std::size_t path_start = cfg.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base_ = cfg.endpoint;
    } else {
      base_ = cfg.endpoint.substr(0, path_start);
      prefix_ = cfg.endpoint.substr(path_start);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
    if (const char* key = std::getenv(cfg.api_key_env.c_str()))
      api_key_ = key;
  }

  CompletionReply complete(const std::string& prompt) const {
    httplib::Client client(base_);
    client.set_connection_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
    httplib::Headers headers;
    if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);

    nlohmann::json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    if (cfg_.top_p >= 0.0) body["top_p"] = cfg_.top_p;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", prompt}}});

    CompletionReply reply;
    httplib::Result res = client.Post(prefix_ + "/v1/chat/completions",
                                      headers, body.dump(),
                                      "application/json");
    if (!res) {
      reply.error = "transport failure: " + httplib::to_string(res.error());
      return reply;
    }
    reply.status = res->status;
    if (res->status == 401 || res->status == 403)
      throw AuthError("endpoint rejected the API key (HTTP " +
                      std::to_string(res->status) + "); check $" +
                      cfg_.api_key_env);
    if (res->status != 200) {
      reply.error = "HTTP " + std::to_string(res->status);
      return reply;
    }
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      reply.content =
          j.at("choices").at(0).at("message").at("content").get<std::string>();
      reply.ok = true;
    } catch (const nlohmann::json::exception& e) {
      reply.error = std::string("malformed completion payload: ") + e.what();
    }
    return reply;
  }

 private:
  const RemoteConfig& cfg_;
  std::string base_;
  std::string prefix_;
  std::string api_key_;
};

}  // namespace detail

struct RemoteRunResult {
  ParallelCorpus pairs;            // (generated-errorful, clean input)
  std::vector<std::uint8_t> flagged;  // identity fallback after exhaustion
  std::uint64_t requested = 0;     // HTTP requests actually issued
  std::uint64_t from_journal = 0;  // sentences answered from the cache
  std::uint64_t failed = 0;        // sentences that fell back to identity
};

inline RemoteRunResult generate_remote(const Corpus& corpus,
                                       const RemoteConfig& cfg,
                                       const PromptTemplate& tmpl,
                                       const ParallelCorpus& gold_pool,
                                       std::uint64_t seed) {
  cfg.validate();
  if (gold_pool.pairs.size() < tmpl.slots)
    throw Error("example pool has " + std::to_string(gold_pool.pairs.size()) +
                " pairs but the template wants " + std::to_string(tmpl.slots));

  detail::ChatClient client(cfg);
  ResponseJournal journal(cfg.journal_dir);

  RemoteRunResult result;
  result.pairs.origin = corpus.origin;
  result.pairs.pairs.resize(corpus.lines.size());
  result.flagged.assign(corpus.lines.size(), 0);

  std::atomic<std::size_t> next{0};
  std::atomic<std::uint64_t> requested{0}, cached{0}, failed{0};
  std::atomic<bool> stop{false};
  std::mutex fatal_mu;
  std::exception_ptr fatal;

  auto sample_examples = [&](Rng& rng) {
    std::vector<std::pair<std::string, std::string>> ex;
    std::vector<std::size_t> picked;
    while (ex.size() < tmpl.slots) {
      std::size_t i =
          static_cast<std::size_t>(rng.below(gold_pool.pairs.size()));
      bool dup = false;
      for (std::size_t p : picked) dup = dup || p == i;
      if (dup) continue;
      picked.push_back(i);
      // pool rows are (errorful, clean); the prompt wants correct first
      ex.emplace_back(gold_pool.pairs[i].second, gold_pool.pairs[i].first);
    }
    return ex;
  };

  auto work = [&]() {
    while (!stop.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= corpus.lines.size()) return;
      const std::string& line = corpus.lines[i];
      try {
        Rng rng(seed, i);
        std::string prompt = render_prompt(tmpl, sample_examples(rng), line);
        std::string key = journal_key(cfg, prompt);

        std::string raw;
        bool have = journal.lookup(key, raw);
        if (have) {
          ++cached;
        } else {
          for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
            if (attempt > 0)
              std::this_thread::sleep_for(std::chrono::milliseconds(
                  cfg.backoff_base_ms * (1LL << (attempt - 1))));
            ++requested;
            detail::CompletionReply reply = client.complete(prompt);
            if (reply.ok) {
              raw = reply.content;
              have = true;
              journal.record(key, raw);
              break;
            }
          }
        }
        if (have) {
          result.pairs.pairs[i] = {post_process(line, raw, tmpl, cfg), line};
        } else {
          ++failed;
          result.flagged[i] = 1;
          result.pairs.pairs[i] = {line, line};
        }
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(fatal_mu);
          if (!fatal) fatal = std::current_exception();
        }
        stop.store(true);
        return;
      }
    }
  };

  int workers = cfg.concurrency;
  if (corpus.lines.size() < static_cast<std::size_t>(workers))
    workers = static_cast<int>(std::max<std::size_t>(corpus.lines.size(), 1));
  if (workers > 1) {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  } else {
    work();
  }
  if (fatal) std::rethrow_exception(fatal);

  result.requested = requested.load();
  result.from_journal = cached.load();
  result.failed = failed.load();
  return result;
}

}  // namespace gectk
