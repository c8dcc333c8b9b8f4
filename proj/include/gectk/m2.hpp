#pragma once

// Reader and writer for the M2 annotation format:
//
//   S He go to school .
//   A 1 2|||R:VERB:FORM|||goes|||REQUIRED|||-NONE-|||0
//   <blank line>
//
// One record per sentence: an "S" line with the tokenized source, then one
// "A" line per edit. An annotator with no edits is written as the line
//   A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||<id>
// Canonical form sorts edits by annotator id then span, joins multi-token
// corrections with single spaces, and ends every record with a blank line;
// serializing a parsed canonical file reproduces it byte for byte. Lines with
// more than the six standard fields keep the extra fields verbatim between
// the comment and the trailing annotator id.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gectk/errors.hpp"
#include "gectk/text.hpp"

namespace gectk {

struct Edit {
  int start = 0;                      // token span on the source, end exclusive
  int end = 0;                        // start == end: insertion before `start`
  std::string correction;             // empty with start < end: deletion
  std::string category = "UNK";
  int annotator = 0;
  std::string required = "REQUIRED";
  std::string comment = "-NONE-";
  std::vector<std::string> extras;    // unknown fields, preserved verbatim

  bool operator==(const Edit&) const = default;
  bool is_insertion() const { return start == end; }
  bool is_deletion() const { return correction.empty() && start < end; }
  std::vector<std::string> correction_tokens() const { return split_tokens(correction); }
};

struct M2Record {
  TokenSequence source;
  // annotator id -> its edits; an entry with an empty vector is an explicit
  // "this annotator saw nothing to fix"
  std::map<int, std::vector<Edit>> annotators;

  bool operator==(const M2Record&) const = default;
};

namespace detail {

inline std::vector<std::string_view> split_bars(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find("|||", pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 3;
  }
}

inline int parse_int(std::string_view s, std::size_t line_no, const char* what) {
  int value = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw FormatError(std::string("bad ") + what + " '" + std::string(s) + "'", line_no);
  return value;
}

inline void check_annotator_edits(std::vector<Edit>& edits, std::size_t line_no,
                                  std::size_t source_len) {
  std::stable_sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const Edit& e = edits[i];
    if (e.start < 0 || e.end < e.start || static_cast<std::size_t>(e.end) > source_len)
      throw FormatError("edit span " + std::to_string(e.start) + " " +
                            std::to_string(e.end) + " out of range for " +
                            std::to_string(source_len) + " tokens",
                        line_no);
    if (i > 0 && edits[i - 1].end > e.start)
      throw FormatError("overlapping edits for annotator " +
                            std::to_string(e.annotator),
                        line_no);
  }
}

}  // namespace detail

inline std::vector<M2Record> parse_m2(std::string_view text) {
  if (!valid_utf8(text)) throw Utf8Error("invalid UTF-8 in annotation data");
  std::vector<M2Record> records;
  bool in_record = false;
  M2Record current;
  std::size_t record_line = 0;  // line of the current S, for span checks
  std::size_t line_no = 0;
  std::size_t pos = 0;

  auto finish = [&]() {
    if (!in_record) return;
    if (current.annotators.empty()) current.annotators[0] = {};
    for (auto& [id, edits] : current.annotators)
      detail::check_annotator_edits(edits, record_line, current.source.size());
    records.push_back(std::move(current));
    current = {};
    in_record = false;
  };

  while (pos <= text.size()) {
    std::size_t next = text.find('\n', pos);
    std::string_view line = (next == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, next - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      finish();
    } else if (line.rfind("S ", 0) == 0 || line == "S") {
      finish();
      in_record = true;
      record_line = line_no;
      current.source = from_pretokenized(line.size() > 2 ? line.substr(2) : "");
    } else if (line.rfind("A ", 0) == 0) {
      if (!in_record)
        throw FormatError("annotation line outside a record", line_no);
      auto fields = detail::split_bars(line.substr(2));
      if (fields.size() < 6)
        throw FormatError("expected at least 6 |||-separated fields, got " +
                              std::to_string(fields.size()),
                          line_no);
      std::size_t space = fields[0].find(' ');
      if (space == std::string_view::npos)
        throw FormatError("bad span field '" + std::string(fields[0]) + "'", line_no);
      Edit e;
      e.start = detail::parse_int(fields[0].substr(0, space), line_no, "span start");
      e.end = detail::parse_int(fields[0].substr(space + 1), line_no, "span end");
      e.category = std::string(fields[1]);
      e.correction = std::string(fields[2]);
      e.required = std::string(fields[3]);
      e.comment = std::string(fields[4]);
      for (std::size_t i = 5; i + 1 < fields.size(); ++i)
        e.extras.emplace_back(fields[i]);
      e.annotator = detail::parse_int(fields.back(), line_no, "annotator id");
      if (e.category == "noop") {
        if (e.start != -1 || e.end != -1)
          throw FormatError("noop requires span -1 -1", line_no);
        current.annotators[e.annotator];  // present, possibly empty
      } else {
        if (e.correction == "-NONE-") e.correction.clear();
        current.annotators[e.annotator].push_back(std::move(e));
      }
    } else {
      throw FormatError("unrecognized line '" + std::string(line.substr(0, 40)) + "'",
                        line_no);
    }

    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  finish();
  return records;
}

inline std::string serialize_m2(const std::vector<M2Record>& records) {
  std::string out;
  for (const M2Record& rec : records) {
    out += "S ";
    out += join_tokens(rec.source.tokens);
    out.push_back('\n');
    if (rec.annotators.empty()) {
      out += "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n";
    }
    for (const auto& [id, edits] : rec.annotators) {
      if (edits.empty()) {
        out += "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||" +
               std::to_string(id) + "\n";
        continue;
      }
      for (const Edit& e : edits) {
        out += "A " + std::to_string(e.start) + " " + std::to_string(e.end) +
               "|||" + e.category + "|||" + e.correction + "|||" + e.required +
               "|||" + e.comment;
        for (const std::string& x : e.extras) out += "|||" + x;
        out += "|||" + std::to_string(id) + "\n";
      }
    }
    out.push_back('\n');
  }
  return out;
}

inline std::vector<M2Record> load_m2(const std::filesystem::path& path) {
  try {
    return parse_m2(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void save_m2(const std::vector<M2Record>& records,
                    const std::filesystem::path& path) {
  write_file(path, serialize_m2(records));
}

}  // namespace gectk
