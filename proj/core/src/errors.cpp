#include "asl/errors.hpp"

namespace asl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kDuplicateJudgment: return "duplicate judgment";
    case ErrorKind::kDuplicatePrediction: return "duplicate prediction";
    case ErrorKind::kLayout: return "layout error";
    case ErrorKind::kInsufficientRuns: return "insufficient runs";
    case ErrorKind::kUndefinedMetric: return "undefined metric";
    case ErrorKind::kDegenerateQuery: return "degenerate query";
    case ErrorKind::kZeroErrorBaseline: return "zero-error baseline";
    case ErrorKind::kPairing: return "pairing error";
    case ErrorKind::kUndefinedImprovement: return "undefined improvement";
    case ErrorKind::kUndefinedRatio: return "undefined ratio";
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kLookup: return "lookup error";
    case ErrorKind::kMatching: return "matching error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

namespace {
std::string located(const std::string& source, std::size_t line,
                    const std::string& message) {
  std::string out = source.empty() ? std::string("<input>") : source;
  out += ":" + std::to_string(line) + ": " + message;
  return out;
}
}  // namespace

ParseError::ParseError(ErrorKind kind, std::string source, std::size_t line,
                       const std::string& message)
    : Error(kind, located(source, line, message)),
      source_(std::move(source)),
      line_(line) {}

}  // namespace asl
