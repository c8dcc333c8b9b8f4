#pragma once

#include <stdexcept>
#include <string>

namespace gectk {

// common base so the CLI can map any domain failure to exit code 1
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};

struct Utf8Error : Error {
  using Error::Error;
};

struct ControlCharacterError : Error {
  using Error::Error;
};

struct SampleTooLarge : Error {
  using Error::Error;
};

// carries the 1-based line number of the offending input line
struct FormatError : Error {
  FormatError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
  explicit FormatError(const std::string& msg) : Error(msg), line_number(0) {}
  std::size_t line_number;
};

struct OverlapError : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct EmptyLexicon : Error {
  using Error::Error;
};

struct EmptyGold : Error {
  using Error::Error;
};

struct VersionMismatch : Error {
  using Error::Error;
};

struct ChecksumMismatch : Error {
  using Error::Error;
};

struct SlotCountMismatch : Error {
  using Error::Error;
};

struct EndpointError : Error {
  using Error::Error;
};

struct AuthError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct StepError : Error {
  StepError(const std::string& step, const std::string& msg)
      : Error("step " + step + ": " + msg), step_name(step) {}
  std::string step_name;
};

}  // namespace gectk
