#pragma once

// A count-based error channel fitted from gold annotation: record the inverse
// of every gold edit, then replay those inverses into clean text with the
// fitted frequencies.
//
// The inverse bookkeeping goes by edit structure, not by label: a gold edit
// that inserted tokens becomes a deletable pattern, a gold deletion becomes
// an insertable pattern (with a sentence-decile histogram of where it sat),
// and a replacement a -> b becomes the channel pattern "find b, write a".
// Labels are kept as the category axis of the model, whatever the annotation
// scheme called them.
//
// When a record carries several annotators, the lowest id is fitted; rivals
// of the same sentence would otherwise double-count.
//
// Corruption draws an edit count from the per-sentence histogram, then for
// each draw a category, then a pattern among those applicable to the current
// sentence (weighted by observed count), then a site uniformly among its
// occurrences. Draws with no applicable pattern are skipped and counted. A
// deletion that would empty the sentence is skipped the same way. Everything
// is keyed (seed, sentence index), so runs reproduce and parallelize.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "gectk/align.hpp"
#include "gectk/errors.hpp"
#include "gectk/m2.hpp"
#include "gectk/rng.hpp"
#include "gectk/text.hpp"
#include <json.hpp>

namespace gectk {

struct ReplacePattern {
  std::string find;   // correction side, searched for in clean text
  std::string write;  // source side, written in its place
  std::uint64_t count = 0;
  bool operator==(const ReplacePattern&) const = default;
};

struct DeletePattern {
  std::string token;  // what the gold annotator inserted
  std::uint64_t count = 0;
  bool operator==(const DeletePattern&) const = default;
};

struct InsertPattern {
  std::string token;  // what the gold annotator deleted
  std::uint64_t count = 0;
  std::array<std::uint64_t, 10> deciles{};  // where in the sentence it sat
  bool operator==(const InsertPattern&) const = default;
};

struct CategoryInventory {
  std::vector<ReplacePattern> replace;
  std::vector<DeletePattern> del;
  std::vector<InsertPattern> insert;
  bool operator==(const CategoryInventory&) const = default;

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& p : replace) n += p.count;
    for (const auto& p : del) n += p.count;
    for (const auto& p : insert) n += p.count;
    return n;
  }
};

struct ErrorChannelModel {
  std::vector<std::uint64_t> edit_count_hist;  // index = edits per sentence
  std::map<std::string, CategoryInventory> categories;
  std::string fingerprint;      // of the gold corpus the model was fitted on
  std::uint64_t sentences = 0;  // how many records were fitted
  bool operator==(const ErrorChannelModel&) const = default;

  std::uint64_t total_edits() const {
    std::uint64_t n = 0;
    for (const auto& [name, inv] : categories) n += inv.total();
    return n;
  }
};

inline constexpr int kChannelFormatVersion = 1;

inline ErrorChannelModel fit_channel(const std::vector<M2Record>& gold,
                                     std::uint64_t min_count = 1) {
  if (gold.empty()) throw EmptyGold("no records to fit on");
  ErrorChannelModel model;
  model.fingerprint = hex64(fnv1a64(serialize_m2(gold)));

  std::map<std::string, std::map<std::pair<std::string, std::string>,
                                 std::uint64_t>>
      replaces;
  std::map<std::string, std::map<std::string, std::uint64_t>> deletes;
  std::map<std::string,
           std::map<std::string,
                    std::pair<std::uint64_t, std::array<std::uint64_t, 10>>>>
      inserts;

  for (const M2Record& rec : gold) {
    if (rec.annotators.empty()) continue;
    const std::vector<Edit>& edits = rec.annotators.begin()->second;
    std::size_t k = edits.size();
    if (model.edit_count_hist.size() <= k) model.edit_count_hist.resize(k + 1);
    ++model.edit_count_hist[k];
    ++model.sentences;

    for (const Edit& e : edits) {
      std::vector<std::string> src_span(
          rec.source.tokens.begin() + e.start,
          rec.source.tokens.begin() + e.end);
      if (e.start == e.end) {
        if (e.correction.empty()) continue;  // degenerate no-op edit
        ++deletes[e.category][e.correction];
      } else if (e.correction.empty()) {
        auto& [count, dec] = inserts[e.category][join_tokens(src_span)];
        ++count;
        std::size_t d = std::min<std::size_t>(
            9, static_cast<std::size_t>(e.start) * 10 / rec.source.size());
        ++dec[d];
      } else {
        ++replaces[e.category][{e.correction, join_tokens(src_span)}];
      }
    }
  }

  for (const auto& [cat, table] : replaces)
    for (const auto& [key, count] : table)
      if (count >= min_count)
        model.categories[cat].replace.push_back({key.first, key.second, count});
  for (const auto& [cat, table] : deletes)
    for (const auto& [token, count] : table)
      if (count >= min_count)
        model.categories[cat].del.push_back({token, count});
  for (const auto& [cat, table] : inserts)
    for (const auto& [token, entry] : table)
      if (entry.first >= min_count)
        model.categories[cat].insert.push_back(
            {token, entry.first, entry.second});

  std::erase_if(model.categories,
                [](const auto& kv) { return kv.second.total() == 0; });
  if (model.categories.empty())
    throw EmptyGold("gold carries no usable edits" +
                    std::string(min_count > 1 ? " after count pruning" : ""));
  return model;
}

struct CorruptStats {
  std::uint64_t drawn = 0;    // category draws attempted
  std::uint64_t skipped = 0;  // draws with no applicable site
  std::map<std::string, std::uint64_t> applied;

  CorruptStats& operator+=(const CorruptStats& o) {
    drawn += o.drawn;
    skipped += o.skipped;
    for (const auto& [cat, n] : o.applied) applied[cat] += n;
    return *this;
  }
};

class Corruptor {
 public:
  Corruptor(const ErrorChannelModel& model, std::uint64_t seed)
      : seed_(seed) {
    hist_weights_.reserve(model.edit_count_hist.size());
    for (std::uint64_t n : model.edit_count_hist)
      hist_weights_.push_back(static_cast<double>(n));
    for (const auto& [name, inv] : model.categories) {
      cat_names_.push_back(name);
      cat_weights_.push_back(static_cast<double>(inv.total()));
      CategoryPlan plan;
      for (const ReplacePattern& p : inv.replace)
        plan.replace.push_back(
            {split_tokens(p.find), split_tokens(p.write), p.count});
      for (const DeletePattern& p : inv.del)
        plan.del.push_back({split_tokens(p.token), p.count});
      for (const InsertPattern& p : inv.insert)
        plan.insert.push_back({split_tokens(p.token), p.count, p.deciles});
      plans_.push_back(std::move(plan));
    }
  }

  TokenSequence corrupt(const TokenSequence& s, std::uint64_t sentence_index,
                        CorruptStats* stats = nullptr) const {
    Rng rng(seed_, sentence_index);
    CorruptStats local;
    std::vector<std::string> cur = s.tokens;
    std::vector<std::uint8_t> flags = s.space_before;
    // the leading token's flag is position-dependent, not intrinsic; give it
    // its natural value so material spliced in front of it detaches cleanly
    if (!cur.empty()) flags[0] = detail::attaches_left(cur[0]) ? 0 : 1;

    std::size_t k = hist_weights_.empty() ? 0 : rng.weighted(hist_weights_);
    for (std::size_t j = 0; j < k; ++j) {
      ++local.drawn;
      std::size_t ci = rng.weighted(cat_weights_);
      if (!apply_one(plans_[ci], cur, flags, rng)) {
        ++local.skipped;
      } else {
        ++local.applied[cat_names_[ci]];
      }
    }

    if (stats) *stats += local;
    TokenSequence out;
    out.tokens = std::move(cur);
    out.space_before = std::move(flags);
    if (!out.space_before.empty()) out.space_before[0] = 0;
    return out;
  }

 private:
  struct ReplacePlan {
    std::vector<std::string> find, write;
    std::uint64_t count;
  };
  struct DeletePlan {
    std::vector<std::string> tokens;
    std::uint64_t count;
  };
  struct InsertPlan {
    std::vector<std::string> tokens;
    std::uint64_t count;
    std::array<std::uint64_t, 10> deciles;
  };
  struct CategoryPlan {
    std::vector<ReplacePlan> replace;
    std::vector<DeletePlan> del;
    std::vector<InsertPlan> insert;
  };

  static std::vector<std::size_t> occurrences(
      const std::vector<std::string>& hay,
      const std::vector<std::string>& needle) {
    std::vector<std::size_t> pos;
    if (needle.empty() || needle.size() > hay.size()) return pos;
    for (std::size_t p = 0; p + needle.size() <= hay.size(); ++p) {
      bool hit = true;
      for (std::size_t i = 0; i < needle.size(); ++i)
        if (hay[p + i] != needle[i]) {
          hit = false;
          break;
        }
      if (hit) pos.push_back(p);
    }
    return pos;
  }

  static void splice(std::vector<std::string>& cur,
                     std::vector<std::uint8_t>& flags, std::size_t at,
                     std::size_t remove,
                     const std::vector<std::string>& add) {
    cur.erase(cur.begin() + at, cur.begin() + at + remove);
    flags.erase(flags.begin() + at, flags.begin() + at + remove);
    for (std::size_t i = 0; i < add.size(); ++i) {
      cur.insert(cur.begin() + at + i, add[i]);
      flags.insert(flags.begin() + at + i,
                   detail::attaches_left(add[i]) ? 0 : 1);
    }
  }

  // one category draw against the current sentence; false means no site
  bool apply_one(const CategoryPlan& plan, std::vector<std::string>& cur,
                 std::vector<std::uint8_t>& flags, Rng& rng) const {
    struct Candidate {
      int kind;  // 0 replace, 1 delete, 2 insert
      std::size_t index;
      double weight;
    };
    std::vector<Candidate> cands;
    std::vector<std::vector<std::size_t>> sites;
    for (std::size_t i = 0; i < plan.replace.size(); ++i) {
      auto pos = occurrences(cur, plan.replace[i].find);
      if (pos.empty()) continue;
      cands.push_back({0, i, static_cast<double>(plan.replace[i].count)});
      sites.push_back(std::move(pos));
    }
    for (std::size_t i = 0; i < plan.del.size(); ++i) {
      if (plan.del[i].tokens.size() >= cur.size()) continue;  // keep non-empty
      auto pos = occurrences(cur, plan.del[i].tokens);
      if (pos.empty()) continue;
      cands.push_back({1, i, static_cast<double>(plan.del[i].count)});
      sites.push_back(std::move(pos));
    }
    for (std::size_t i = 0; i < plan.insert.size(); ++i) {
      cands.push_back({2, i, static_cast<double>(plan.insert[i].count)});
      sites.push_back({});
    }
    if (cands.empty()) return false;

    std::vector<double> weights;
    weights.reserve(cands.size());
    for (const Candidate& c : cands) weights.push_back(c.weight);
    std::size_t pick = rng.weighted(weights);
    const Candidate& c = cands[pick];
    switch (c.kind) {
      case 0: {
        const ReplacePlan& p = plan.replace[c.index];
        std::size_t at = sites[pick][static_cast<std::size_t>(
            rng.below(sites[pick].size()))];
        splice(cur, flags, at, p.find.size(), p.write);
        break;
      }
      case 1: {
        const DeletePlan& p = plan.del[c.index];
        std::size_t at = sites[pick][static_cast<std::size_t>(
            rng.below(sites[pick].size()))];
        splice(cur, flags, at, p.tokens.size(), {});
        break;
      }
      default: {
        const InsertPlan& p = plan.insert[c.index];
        std::vector<double> dec(p.deciles.begin(), p.deciles.end());
        double d = static_cast<double>(rng.weighted(dec));
        double u = rng.next_double();
        std::size_t at = std::min(
            cur.size(), static_cast<std::size_t>(
                            (d + u) / 10.0 *
                            static_cast<double>(cur.size() + 1)));
        splice(cur, flags, at, 0, p.tokens);
        break;
      }
    }
    return true;
  }

  std::uint64_t seed_;
  std::vector<double> hist_weights_;
  std::vector<std::string> cat_names_;
  std::vector<double> cat_weights_;
  std::vector<CategoryPlan> plans_;
};

inline TokenSequence corrupt_sentence(const TokenSequence& s,
                                      const ErrorChannelModel& model,
                                      std::uint64_t seed,
                                      std::uint64_t sentence_index,
                                      CorruptStats* stats = nullptr) {
  return Corruptor(model, seed).corrupt(s, sentence_index, stats);
}

// pairs are (corrupted, clean); the clean side is the input line verbatim
inline ParallelCorpus corrupt_corpus(const Corpus& corpus,
                                     const ErrorChannelModel& model,
                                     std::uint64_t seed, int threads = 1,
                                     CorruptStats* stats = nullptr) {
  Corruptor corruptor(model, seed);
  ParallelCorpus out;
  out.origin = corpus.origin;
  out.pairs.resize(corpus.lines.size());
  if (threads <= 0)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<CorruptStats> per_thread(static_cast<std::size_t>(threads));
  auto work = [&](int t) {
    for (std::size_t i = static_cast<std::size_t>(t); i < corpus.lines.size();
         i += static_cast<std::size_t>(threads)) {
      TokenSequence corrupted = corruptor.corrupt(
          tokenize(corpus.lines[i]), i, &per_thread[static_cast<std::size_t>(t)]);
      out.pairs[i] = {detokenize(corrupted), corpus.lines[i]};
    }
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (std::thread& th : pool) th.join();
  } else {
    work(0);
  }
  if (stats)
    for (const CorruptStats& st : per_thread) *stats += st;
  return out;
}

inline nlohmann::json channel_to_json(const ErrorChannelModel& model) {
  nlohmann::json j;
  j["format"] = "gectk-error-channel";
  j["version"] = kChannelFormatVersion;
  j["fingerprint"] = model.fingerprint;
  j["sentences"] = model.sentences;
  j["edit_count_histogram"] = model.edit_count_hist;
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& [name, inv] : model.categories) {
    nlohmann::json c;
    c["name"] = name;
    c["replace"] = nlohmann::json::array();
    for (const ReplacePattern& p : inv.replace)
      c["replace"].push_back(
          {{"find", p.find}, {"write", p.write}, {"count", p.count}});
    c["delete"] = nlohmann::json::array();
    for (const DeletePattern& p : inv.del)
      c["delete"].push_back({{"token", p.token}, {"count", p.count}});
    c["insert"] = nlohmann::json::array();
    for (const InsertPattern& p : inv.insert)
      c["insert"].push_back({{"token", p.token},
                             {"count", p.count},
                             {"deciles", p.deciles}});
    cats.push_back(std::move(c));
  }
  j["categories"] = std::move(cats);
  j["checksum"] = hex64(fnv1a64(j.dump()));
  return j;
}

inline std::string save_channel(const ErrorChannelModel& model) {
  return channel_to_json(model).dump(2) + "\n";
}

inline ErrorChannelModel load_channel(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw ChecksumMismatch("channel file is not parseable (truncated?)");
  }
  if (!j.is_object() || j.value("format", "") != "gectk-error-channel")
    throw ChecksumMismatch("not a channel file");
  int version = j.value("version", 0);
  if (version > kChannelFormatVersion)
    throw VersionMismatch("channel format version " + std::to_string(version) +
                          " is newer than supported " +
                          std::to_string(kChannelFormatVersion));
  std::string stored = j.value("checksum", "");
  nlohmann::json body = j;
  body.erase("checksum");
  if (stored != hex64(fnv1a64(body.dump())))
    throw ChecksumMismatch("channel checksum does not match its content");

  try {
    ErrorChannelModel model;
    model.fingerprint = j.at("fingerprint").get<std::string>();
    model.sentences = j.at("sentences").get<std::uint64_t>();
    model.edit_count_hist =
        j.at("edit_count_histogram").get<std::vector<std::uint64_t>>();
    for (const nlohmann::json& c : j.at("categories")) {
      CategoryInventory inv;
      for (const nlohmann::json& p : c.at("replace"))
        inv.replace.push_back({p.at("find").get<std::string>(),
                               p.at("write").get<std::string>(),
                               p.at("count").get<std::uint64_t>()});
      for (const nlohmann::json& p : c.at("delete"))
        inv.del.push_back({p.at("token").get<std::string>(),
                           p.at("count").get<std::uint64_t>()});
      for (const nlohmann::json& p : c.at("insert"))
        inv.insert.push_back(
            {p.at("token").get<std::string>(),
             p.at("count").get<std::uint64_t>(),
             p.at("deciles").get<std::array<std::uint64_t, 10>>()});
      model.categories.emplace(c.at("name").get<std::string>(),
                               std::move(inv));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumMismatch(std::string("channel file structure is wrong: ") +
                           e.what());
  }
}

inline void save_channel_file(const ErrorChannelModel& model,
                              const std::string& path) {
  write_file(path, save_channel(model));
}

inline ErrorChannelModel load_channel_file(const std::string& path) {
  return load_channel(read_file(path));
}

}  // namespace gectk
