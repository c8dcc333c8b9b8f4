#pragma once

// One-line structured logging to stderr, so stdout stays clean for data.
// Lines look like: gectk: level=info op=score msg="scored 500 sentences"

#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace gectk {

enum class LogLevel { Info, Warn, Error };

inline std::string_view log_level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    default: return "error";
  }
}

inline std::string format_log(LogLevel level, std::string_view op,
                              std::string_view msg) {
  std::string out = "gectk: level=";
  out += log_level_name(level);
  out += " op=";
  out += op;
  out += " msg=\"";
  for (char c : msg) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += ' ';
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

inline void log(LogLevel level, std::string_view op, std::string_view msg) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << format_log(level, op, msg) << '\n';
}

}  // namespace gectk
