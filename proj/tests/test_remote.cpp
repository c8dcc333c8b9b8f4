#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "gectk/remote.hpp"
#include "support/helpers.hpp"
#include "support/mock_openai.hpp"

using namespace gectk;
using testsupport::MockOpenAi;
using testsupport::MockReply;

static PromptTemplate tiny_template() {
  PromptTemplate t;
  t.language = "xx";
  t.instruction = "Rewrite the input with mistakes. Two examples:";
  t.input_label = "In:";
  t.output_label = "Out:";
  t.slots = 2;
  return t;
}

static ParallelCorpus tiny_pool() {
  ParallelCorpus pool;
  pool.pairs = {{"teh cat", "the cat"},
                {"a dgo", "a dog"},
                {"brids fly", "birds fly"}};
  return pool;
}

static Corpus tiny_corpus() {
  Corpus c;
  c.lines = {"the cat sat down", "a dog ran far away",
             "birds fly south in autumn"};
  return c;
}

static RemoteConfig mock_cfg(const MockOpenAi& server) {
  RemoteConfig cfg;
  cfg.endpoint = server.endpoint();
  cfg.model = "mock-model";
  cfg.concurrency = 2;
  cfg.max_attempts = 2;
  cfg.backoff_base_ms = 1;
  cfg.timeout_ms = 5000;
  cfg.api_key_env = "GECTK_TEST_NO_SUCH_KEY";
  return cfg;
}

TEST_CASE("prompt rendering interleaves labeled example pairs") {
  PromptTemplate t = tiny_template();
  std::vector<std::pair<std::string, std::string>> ex = {
      {"good one", "gud one"}, {"nice day", "nise day"}};
  REQUIRE(render_prompt(t, ex, "clear sky") ==
          "Rewrite the input with mistakes. Two examples:\n"
          "\nIn: good one\nOut: gud one\n"
          "\nIn: nice day\nOut: nise day\n"
          "\nIn: clear sky\nOut:");
}

TEST_CASE("prompt rendering rejects a wrong example count") {
  PromptTemplate t = tiny_template();
  std::vector<std::pair<std::string, std::string>> one = {{"a", "b"}};
  REQUIRE_THROWS_AS(render_prompt(t, one, "x"), SlotCountMismatch);
  std::vector<std::pair<std::string, std::string>> three = {
      {"a", "b"}, {"c", "d"}, {"e", "f"}};
  REQUIRE_THROWS_AS(render_prompt(t, three, "x"), SlotCountMismatch);
}

TEST_CASE("built-in templates exist for et, de, uk") {
  for (const char* name : {"et", "de", "uk"}) {
    PromptTemplate t = builtin_prompt_template(name);
    REQUIRE(t.language == name);
    REQUIRE_FALSE(t.instruction.empty());
    REQUIRE_FALSE(t.input_label.empty());
    REQUIRE_FALSE(t.output_label.empty());
    REQUIRE(t.slots == 4);
    REQUIRE(t.input_label.back() == ':');
  }
  REQUIRE(builtin_prompt_template("et").instruction.substr(0, 5) == "Muuda");
  REQUIRE_THROWS_AS(builtin_prompt_template("fi"), ConfigError);
}

TEST_CASE("template files load with defaults and validation") {
  testsupport::TempDir dir("tmpl");
  auto file = (dir / "t.json").string();

  SECTION("full round trip") {
    write_file(file,
               "{\"language\":\"cs\",\"instruction\":\"Do it.\","
               "\"input_label\":\"Vstup:\",\"output_label\":\"Vystup:\","
               "\"slots\":3}");
    PromptTemplate t = load_prompt_template(file);
    REQUIRE(t.language == "cs");
    REQUIRE(t.instruction == "Do it.");
    REQUIRE(t.input_label == "Vstup:");
    REQUIRE(t.output_label == "Vystup:");
    REQUIRE(t.slots == 3);
  }
  SECTION("slots default to four") {
    write_file(file,
               "{\"instruction\":\"Go.\",\"input_label\":\"I:\","
               "\"output_label\":\"O:\"}");
    REQUIRE(load_prompt_template(file).slots == 4);
  }
  SECTION("missing field") {
    write_file(file, "{\"instruction\":\"Go.\",\"input_label\":\"I:\"}");
    REQUIRE_THROWS_AS(load_prompt_template(file), ConfigError);
  }
  SECTION("broken JSON") {
    write_file(file, "{nope");
    REQUIRE_THROWS_AS(load_prompt_template(file), ConfigError);
  }
  SECTION("zero slots") {
    write_file(file,
               "{\"instruction\":\"Go.\",\"input_label\":\"I:\","
               "\"output_label\":\"O:\",\"slots\":0}");
    REQUIRE_THROWS_AS(load_prompt_template(file), ConfigError);
  }
}

TEST_CASE("response cleanup strips labels, quotes, and line breaks") {
  PromptTemplate t = tiny_template();
  RemoteConfig cfg;
  const std::string in = "the cat sat on the mat";

  REQUIRE(post_process(in, "the cat sat on teh mat", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "Out: the cat sat on teh mat", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "In: the cat sat on teh mat", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "  Out:  the cat sat on teh mat  ", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "Out: \"the cat sat on teh mat\"", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "Out: Out: 'the cat sat on teh mat'", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "„the cat sat on teh mat“", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "«the cat sat on teh mat»", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "the cat\nsat on teh mat", t, cfg) ==
          "the cat sat on teh mat");
  REQUIRE(post_process(in, "the cat\r\nsat\ton teh mat", t, cfg) ==
          "the cat sat on teh mat");
}

TEST_CASE("response cleanup falls back to the input when output is unusable") {
  PromptTemplate t = tiny_template();
  RemoteConfig cfg;
  const std::string in = "please rewrite this longer sentence for me now";

  SECTION("verbatim echo short-circuits") {
    std::string odd = "Out: looks like a label but is the input";
    REQUIRE(post_process(odd, odd, t, cfg) == odd);
  }
  SECTION("empty and whitespace-only") {
    REQUIRE(post_process(in, "", t, cfg) == in);
    REQUIRE(post_process(in, "   \n \t ", t, cfg) == in);
    REQUIRE(post_process(in, "Out:", t, cfg) == in);
  }
  SECTION("length ratio out of bounds") {
    REQUIRE(post_process("a b", "one two three four five", t, cfg) == "a b");
    REQUIRE(post_process("one two three four", "one", t, cfg) ==
            "one two three four");
    // boundary values are inside the allowed band
    REQUIRE(post_process("a b", "x y z", t, cfg) == "x y z");
    REQUIRE(post_process("a b", "x", t, cfg) == "x");
  }
  SECTION("refusal phrases") {
    REQUIRE(post_process(in, "I cannot do that for you my friend today", t,
                         cfg) == in);
    REQUIRE(post_process(in, "As an AI there are some things I avoid doing",
                         t, cfg) == in);
  }
  SECTION("invalid UTF-8") {
    std::string bad = "please rewrite this longer sentence ";
    bad += '\xff';
    bad += " for me";
    REQUIRE(post_process(in, bad, t, cfg) == in);
  }
}

TEST_CASE("response cleanup is idempotent") {
  PromptTemplate t = tiny_template();
  RemoteConfig cfg;
  const std::string in = "the cat sat on the mat";
  std::vector<std::string> raws = {
      "the cat sat on teh mat",
      "Out: \"the cat\nsat on teh mat\"",
      "In: Out: „the cat sat on teh mat“",
      "",
      "Out:",
      "one",
      "one two three four five six seven eight nine",
      "I cannot possibly sit on the mat today sir",
      in,
  };
  for (const std::string& raw : raws) {
    std::string once = post_process(in, raw, t, cfg);
    REQUIRE(post_process(in, once, t, cfg) == once);
  }
}

TEST_CASE("journal keys track model, temperature, and prompt") {
  RemoteConfig a;
  a.model = "m1";
  a.temperature = 1.0;
  RemoteConfig b = a;
  REQUIRE(journal_key(a, "p") == journal_key(b, "p"));
  REQUIRE(journal_key(a, "p") != journal_key(a, "q"));
  b.model = "m2";
  REQUIRE(journal_key(a, "p") != journal_key(b, "p"));
  b = a;
  b.temperature = 0.7;
  REQUIRE(journal_key(a, "p") != journal_key(b, "p"));
}

TEST_CASE("response journal persists and deduplicates") {
  testsupport::TempDir dir("journal");
  std::string d = dir.path().string();
  {
    ResponseJournal j(d);
    REQUIRE(j.enabled());
    REQUIRE(j.size() == 0);
    j.record("k1", "first\nanswer");
    j.record("k2", "second");
    j.record("k1", "changed");  // first write wins
    REQUIRE(j.size() == 2);
    std::string got;
    REQUIRE(j.lookup("k1", got));
    REQUIRE(got == "first\nanswer");
    REQUIRE_FALSE(j.lookup("k9", got));
  }
  ResponseJournal reloaded(d);
  REQUIRE(reloaded.size() == 2);
  std::string got;
  REQUIRE(reloaded.lookup("k1", got));
  REQUIRE(got == "first\nanswer");
  REQUIRE(reloaded.lookup("k2", got));
  REQUIRE(got == "second");

  std::ifstream in(reloaded.file_path());
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  REQUIRE(lines == 2);
}

TEST_CASE("response journal rejects corrupt entries") {
  testsupport::TempDir dir("journal-bad");
  std::string d = dir.path().string();
  { ResponseJournal j(d); j.record("k1", "v"); }
  std::ofstream(d + "/responses.jsonl", std::ios::app) << "not json\n";
  REQUIRE_THROWS_AS(ResponseJournal(d), FormatError);
}

TEST_CASE("disabled journal is inert") {
  ResponseJournal j("");
  REQUIRE_FALSE(j.enabled());
  j.record("k", "v");
  std::string got;
  REQUIRE_FALSE(j.lookup("k", got));
}

TEST_CASE("endpoint parsing rejects unusable values") {
  RemoteConfig cfg;
  PromptTemplate t = tiny_template();
  Corpus c = tiny_corpus();
  cfg.endpoint = "ftp://example.test";
  REQUIRE_THROWS_AS(generate_remote(c, cfg, t, tiny_pool(), 1),
                    EndpointError);
  cfg.endpoint = "no-scheme-at-all";
  REQUIRE_THROWS_AS(generate_remote(c, cfg, t, tiny_pool(), 1),
                    EndpointError);
}

TEST_CASE("generation requires a large enough example pool") {
  MockOpenAi server([](const std::string&, int) {
    return MockReply{200, "x", false};
  });
  RemoteConfig cfg = mock_cfg(server);
  ParallelCorpus pool;
  pool.pairs = {{"a", "b"}};
  REQUIRE_THROWS_AS(
      generate_remote(tiny_corpus(), cfg, tiny_template(), pool, 1), Error);
}

TEST_CASE("generation pairs model output with the clean input") {
  PromptTemplate t = tiny_template();
  std::mutex mu;
  std::vector<std::string> prompts;
  MockOpenAi server([&](const std::string& prompt, int) {
    {
      std::lock_guard<std::mutex> lock(mu);
      prompts.push_back(prompt);
    }
    return MockReply{200, "zz " + testsupport::last_input_of(prompt, t),
                     false};
  });
  RemoteConfig cfg = mock_cfg(server);
  Corpus c = tiny_corpus();

  RemoteRunResult r = generate_remote(c, cfg, t, tiny_pool(), 7);
  REQUIRE(r.pairs.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE(r.pairs.pairs[i].first == "zz " + c.lines[i]);
    REQUIRE(r.pairs.pairs[i].second == c.lines[i]);
    REQUIRE(r.flagged[i] == 0);
  }
  REQUIRE(r.requested == c.size());
  REQUIRE(r.from_journal == 0);
  REQUIRE(r.failed == 0);
  REQUIRE(server.last_model() == "mock-model");

  // each prompt carries the instruction and clean-first example pairs
  REQUIRE(prompts.size() == c.size());
  for (const std::string& p : prompts) {
    REQUIRE(p.substr(0, t.instruction.size()) == t.instruction);
    bool has_example = p.find("In: the cat\nOut: teh cat") != std::string::npos ||
                       p.find("In: a dog\nOut: a dgo") != std::string::npos ||
                       p.find("In: birds fly\nOut: brids fly") !=
                           std::string::npos;
    REQUIRE(has_example);
  }
}

TEST_CASE("example sampling is without replacement") {
  PromptTemplate t = tiny_template();
  t.slots = 3;  // equal to the pool size, so every example must appear
  std::mutex mu;
  std::vector<std::string> prompts;
  MockOpenAi server([&](const std::string& prompt, int) {
    {
      std::lock_guard<std::mutex> lock(mu);
      prompts.push_back(prompt);
    }
    return MockReply{200, "ok ok ok ok", false};
  });
  RemoteConfig cfg = mock_cfg(server);
  Corpus c;
  c.lines = {"just one line here"};
  generate_remote(c, cfg, t, tiny_pool(), 3);
  REQUIRE(prompts.size() == 1);
  REQUIRE(prompts[0].find("In: the cat\nOut: teh cat") != std::string::npos);
  REQUIRE(prompts[0].find("In: a dog\nOut: a dgo") != std::string::npos);
  REQUIRE(prompts[0].find("In: birds fly\nOut: brids fly") !=
          std::string::npos);
}

TEST_CASE("transient failures retry and then succeed") {
  PromptTemplate t = tiny_template();
  MockOpenAi server([&](const std::string& prompt, int idx) {
    if (idx < 2) return MockReply{500, "", false};
    return MockReply{200, "zz " + testsupport::last_input_of(prompt, t),
                     false};
  });
  RemoteConfig cfg = mock_cfg(server);
  cfg.concurrency = 1;
  cfg.max_attempts = 3;
  Corpus c = tiny_corpus();

  RemoteRunResult r = generate_remote(c, cfg, t, tiny_pool(), 7);
  REQUIRE(r.failed == 0);
  REQUIRE(r.requested == c.size() + 2);
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE(r.flagged[i] == 0);
    REQUIRE(r.pairs.pairs[i].first == "zz " + c.lines[i]);
  }
}

TEST_CASE("exhausted retries fall back to flagged identity pairs") {
  MockOpenAi server(
      [](const std::string&, int) { return MockReply{500, "", false}; });
  RemoteConfig cfg = mock_cfg(server);
  Corpus c = tiny_corpus();

  RemoteRunResult r = generate_remote(c, cfg, tiny_template(), tiny_pool(), 7);
  REQUIRE(r.pairs.size() == c.size());
  REQUIRE(r.failed == c.size());
  REQUIRE(r.requested == c.size() * 2);  // max_attempts is 2
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE(r.flagged[i] == 1);
    REQUIRE(r.pairs.pairs[i].first == c.lines[i]);
    REQUIRE(r.pairs.pairs[i].second == c.lines[i]);
  }
}

TEST_CASE("malformed completion payloads count as failures") {
  MockOpenAi server(
      [](const std::string&, int) { return MockReply{200, "", true}; });
  RemoteConfig cfg = mock_cfg(server);
  Corpus c = tiny_corpus();
  RemoteRunResult r = generate_remote(c, cfg, tiny_template(), tiny_pool(), 7);
  REQUIRE(r.failed == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(r.flagged[i] == 1);
}

TEST_CASE("authentication rejections abort the whole run") {
  MockOpenAi server(
      [](const std::string&, int) { return MockReply{401, "", false}; });
  RemoteConfig cfg = mock_cfg(server);
  REQUIRE_THROWS_AS(
      generate_remote(tiny_corpus(), cfg, tiny_template(), tiny_pool(), 7),
      AuthError);

  MockOpenAi forbidden(
      [](const std::string&, int) { return MockReply{403, "", false}; });
  RemoteConfig cfg2 = mock_cfg(forbidden);
  REQUIRE_THROWS_AS(
      generate_remote(tiny_corpus(), cfg2, tiny_template(), tiny_pool(), 7),
      AuthError);
}

TEST_CASE("unusable successful output falls back without a flag") {
  SECTION("empty content") {
    MockOpenAi server(
        [](const std::string&, int) { return MockReply{200, "", false}; });
    RemoteConfig cfg = mock_cfg(server);
    Corpus c = tiny_corpus();
    RemoteRunResult r =
        generate_remote(c, cfg, tiny_template(), tiny_pool(), 7);
    REQUIRE(r.failed == 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      REQUIRE(r.flagged[i] == 0);
      REQUIRE(r.pairs.pairs[i].first == c.lines[i]);
    }
  }
  SECTION("output three times the input length") {
    PromptTemplate t = tiny_template();
    MockOpenAi server([&](const std::string& prompt, int) {
      std::string in = testsupport::last_input_of(prompt, t);
      return MockReply{200, in + " " + in + " " + in, false};
    });
    RemoteConfig cfg = mock_cfg(server);
    Corpus c = tiny_corpus();
    RemoteRunResult r = generate_remote(c, cfg, t, tiny_pool(), 7);
    for (std::size_t i = 0; i < c.size(); ++i)
      REQUIRE(r.pairs.pairs[i].first == c.lines[i]);
  }
  SECTION("refusal phrase") {
    MockOpenAi server([](const std::string&, int) {
      return MockReply{200, "I cannot generate errors for that text", false};
    });
    RemoteConfig cfg = mock_cfg(server);
    Corpus c;
    c.lines = {"seven little words walk into a bar"};
    RemoteRunResult r =
        generate_remote(c, cfg, tiny_template(), tiny_pool(), 7);
    REQUIRE(r.pairs.pairs[0].first == c.lines[0]);
    REQUIRE(r.flagged[0] == 0);
  }
}

TEST_CASE("journal replay answers a rerun without network traffic") {
  testsupport::TempDir dir("journal-replay");
  PromptTemplate t = tiny_template();
  Corpus c = tiny_corpus();

  RemoteRunResult first;
  {
    MockOpenAi server([&](const std::string& prompt, int) {
      return MockReply{200, "zz " + testsupport::last_input_of(prompt, t),
                       false};
    });
    RemoteConfig cfg = mock_cfg(server);
    cfg.journal_dir = dir.path().string();
    first = generate_remote(c, cfg, t, tiny_pool(), 7);
    REQUIRE(first.requested == c.size());
    REQUIRE(first.from_journal == 0);
  }

  // same run keyed against a dead endpoint: every answer must come from disk
  RemoteConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1";
  cfg.model = "mock-model";
  cfg.max_attempts = 1;
  cfg.backoff_base_ms = 1;
  cfg.timeout_ms = 1000;
  cfg.api_key_env = "GECTK_TEST_NO_SUCH_KEY";
  cfg.journal_dir = dir.path().string();
  RemoteRunResult second = generate_remote(c, cfg, t, tiny_pool(), 7);
  REQUIRE(second.requested == 0);
  REQUIRE(second.from_journal == c.size());
  REQUIRE(second.failed == 0);
  REQUIRE(second.pairs.pairs == first.pairs.pairs);
}

TEST_CASE("concurrency does not change the generated corpus") {
  PromptTemplate t = tiny_template();
  auto behavior = [&](const std::string& prompt, int) {
    return MockReply{200, "zz " + testsupport::last_input_of(prompt, t),
                     false};
  };
  Corpus c;
  for (int i = 0; i < 8; ++i)
    c.lines.push_back("steady line number " + std::to_string(i) + " here");

  MockOpenAi s1(behavior);
  RemoteConfig c1 = mock_cfg(s1);
  c1.concurrency = 1;
  RemoteRunResult r1 = generate_remote(c, c1, t, tiny_pool(), 42);

  MockOpenAi s4(behavior);
  RemoteConfig c4 = mock_cfg(s4);
  c4.concurrency = 4;
  RemoteRunResult r4 = generate_remote(c, c4, t, tiny_pool(), 42);

  REQUIRE(r1.pairs.pairs == r4.pairs.pairs);
}

TEST_CASE("API key travels only through the environment") {
  PromptTemplate t = tiny_template();
  auto behavior = [&](const std::string& prompt, int) {
    return MockReply{200, "zz " + testsupport::last_input_of(prompt, t),
                     false};
  };
  Corpus c;
  c.lines = {"one single line to send"};

  SECTION("set variable becomes a bearer header") {
    ::setenv("GECTK_TEST_API_KEY", "sk-test-123", 1);
    MockOpenAi server(behavior);
    RemoteConfig cfg = mock_cfg(server);
    cfg.api_key_env = "GECTK_TEST_API_KEY";
    generate_remote(c, cfg, t, tiny_pool(), 1);
    REQUIRE(server.last_auth() == "Bearer sk-test-123");
    ::unsetenv("GECTK_TEST_API_KEY");
  }
  SECTION("unset variable sends no header") {
    MockOpenAi server(behavior);
    RemoteConfig cfg = mock_cfg(server);
    generate_remote(c, cfg, t, tiny_pool(), 1);
    REQUIRE(server.last_auth().empty());
  }
}

TEST_CASE("remote config validation") {
  RemoteConfig cfg;
  cfg.temperature = -0.1;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RemoteConfig{};
  cfg.concurrency = 0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RemoteConfig{};
  cfg.max_attempts = 0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RemoteConfig{};
  cfg.min_length_ratio = 2.0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  REQUIRE_NOTHROW(RemoteConfig{}.validate());
}
