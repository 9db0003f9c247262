#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sideseeing {

enum class ErrorCode {
  MissingMetadata,
  MalformedCsv,
  MalformedJson,
  SchemaMismatch,
  IoFailure,
  MissingAnchor,
  EmptyInterval,
  TooFewSamples,
  WindowTooLarge,
  MissingSensor,
  SpanTooShort,
  IntervalOutOfRange,
  MediaToolMissing,
  MediaToolFailed,
  TimeOutOfRange,
  NoAudioTrack,
  InvalidCoordinate,
  EmptyInput,
  NoGpsData,
  InvalidAnnotations,
  RootMissing,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (CLI, HTTP layer, Python bindings) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class CsvError : public Error {
 public:
  CsvError(std::string file, std::size_t line, const std::string& reason)
      : Error(ErrorCode::MalformedCsv,
              file + ":" + std::to_string(line) + ": " + reason),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class MediaToolError : public Error {
 public:
  MediaToolError(int exit_status, std::string stderr_excerpt)
      : Error(ErrorCode::MediaToolFailed,
              "exit status " + std::to_string(exit_status) + ": " + stderr_excerpt),
        exit_status_(exit_status),
        excerpt_(std::move(stderr_excerpt)) {}

  int exit_status() const noexcept { return exit_status_; }
  const std::string& stderr_excerpt() const noexcept { return excerpt_; }

 private:
  int exit_status_;
  std::string excerpt_;
};

}  // namespace sideseeing
