#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace asl {

enum class ErrorKind {
  kParse,
  kDuplicateJudgment,
  kDuplicatePrediction,
  kLayout,
  kInsufficientRuns,
  kUndefinedMetric,
  kDegenerateQuery,
  kZeroErrorBaseline,
  kPairing,
  kUndefinedImprovement,
  kUndefinedRatio,
  kInvalidArgument,
  kLookup,
  kMatching,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets callers
// (the CLI in particular) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::string source, std::size_t line,
             const std::string& message);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace asl
