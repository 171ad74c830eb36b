#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asl/insight.hpp"
#include "asl/metrics.hpp"
#include "asl/stat_tests.hpp"
#include "asl/trec_io.hpp"

namespace asl::cli {

inline constexpr int kSchemaVersion = 1;

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitPropertyFailure = 2;

enum class Command { kEval, kCompare, kReorder, kHistogram, kHeadroom, kOracle };
enum class OutputFormat { kTsv, kJson };
enum class Rounding { kPrecise, kPaper };

struct RunConfig {
  Command command = Command::kEval;

  // Inputs: either qrels + runs_dir, or tracks_dir (one track directory or a
  // directory of them).
  std::string qrels;
  std::string runs_dir;
  std::string tracks_dir;

  std::vector<std::string> metrics;
  std::vector<std::size_t> g_values{1, 10};
  std::vector<std::size_t> k_values{20};
  int threshold = 1;
  OrderingPolicy order = OrderingPolicy::kByScore;
  bool dedupe = false;
  std::optional<std::size_t> min_runs;  // command default when unset
  unsigned jobs = 1;

  SignificanceConfig significance;
  StdDevKind stddev = StdDevKind::kPopulation;

  OutputFormat format = OutputFormat::kTsv;
  Rounding rounding = Rounding::kPrecise;
  bool per_query = false;
  std::string detail;  // reorder: summary|tracks|systems; headroom: tracks|distribution
  std::string output;  // empty: stdout

  // compare
  std::string baseline;
  std::string candidate;
  std::vector<std::string> values;  // NAME=BASE,CAND
  std::string values_file;          // TSV: metric baseline candidate

  // reorder
  std::string preset = "all";  // ablation|top|all, used when metrics is empty

  // histogram
  std::string system;
  std::string versus;
  bool delta = false;
  std::vector<double> edges;

  // oracle
  std::uint64_t seed = 0;
  std::size_t trials = 10000;
  std::vector<double> search_lengths;
  PartitionLevel level = PartitionLevel::kPerQuery;

  void validate() const;
};

// --- Reports -----------------------------------------------------------------

struct EvalReport {
  std::vector<MetricId> metrics;
  std::vector<TrackScores> tracks;
  Warnings warnings;
};

struct ComparisonRow {
  MetricId metric;
  double baseline = 0.0;
  double candidate = 0.0;
  std::optional<double> rrie;  // nullopt when the baseline error is zero
};

struct ComparisonReport {
  std::string baseline_id = "baseline";
  std::string candidate_id = "candidate";
  std::vector<ComparisonRow> rows;
  Warnings warnings;
};

struct ReorderRun {
  std::vector<ReorderReport> comparisons;
  Warnings warnings;
};

struct HistogramReport {
  std::string track_id;
  std::string system_a;
  std::string system_b;  // empty unless a delta histogram
  bool is_delta = false;
  HistogramSpec spec;
  Histogram histogram;
  std::size_t relevant_pairs = 0;
  Warnings warnings;
};

struct HeadroomReport {
  std::vector<MetricId> metrics;
  std::vector<HeadroomRow> rows;
  std::vector<std::pair<MetricId, Histogram>> distributions;
  Warnings warnings;
};

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_passed() const;
};

// One entry per metric of a Table-1 style comparison.
ComparisonReport compare_values(
    const std::vector<std::pair<MetricId, std::pair<double, double>>>& values);

EvalReport cmd_eval(const RunConfig& config);
ComparisonReport cmd_compare(const RunConfig& config);
ReorderRun cmd_reorder(const RunConfig& config);
HistogramReport cmd_histogram(const RunConfig& config);
HeadroomReport cmd_headroom(const RunConfig& config);
OracleReport cmd_oracle(const RunConfig& config);

// --- Presentation --------------------------------------------------------------

// ASL-family values round to an integer and rates to three decimals under
// paper rounding; precise output uses four decimals.
std::string format_value(const MetricId& metric, double value, Rounding rounding);
double present_value(const MetricId& metric, double value, Rounding rounding);
std::string format_rrie(double rrie, Rounding rounding);

void write_report(const EvalReport& report, const RunConfig& config, std::ostream& out);
void write_report(const ComparisonReport& report, const RunConfig& config, std::ostream& out);
void write_report(const ReorderRun& report, const RunConfig& config, std::ostream& out);
void write_report(const HistogramReport& report, const RunConfig& config, std::ostream& out);
void write_report(const HeadroomReport& report, const RunConfig& config, std::ostream& out);
void write_report(const OracleReport& report, const RunConfig& config, std::ostream& out);

// Runs a parsed configuration; warnings and diagnostics go to `err`.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command line entry point, including argument parsing.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asl::cli
