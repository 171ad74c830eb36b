#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "asl/metrics.hpp"

namespace asl {

enum class TTestKind { kPaired, kTwoSample };

/// The two gates a system must pass to count as better than another: a
/// relative gain in the metric's favorable direction and a two-tailed t-test.
struct SignificanceConfig {
  double min_relative_gain = 0.10;
  double max_p_value = 0.05;
  TTestKind test = TTestKind::kPaired;

  void validate() const;  // both thresholds in (0, 1)
};

// Variance floor applied when every paired difference is identical.
inline constexpr double kVarianceFloor = 1e-30;

// Two-tailed p-value of the paired t statistic. Identical inputs give 1.0.
// Throws kPairing on length mismatch or fewer than two pairs.
double paired_t_test(std::span<const double> a, std::span<const double> b);
// Pairs by query-id; every id must be present on both sides.
double paired_t_test(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b);
// Pooled-variance Student t-test on two independent samples.
double two_sample_t_test(std::span<const double> a, std::span<const double> b);

// (a-b)/b for higher-better metrics, (b-a)/b for lower-better ones. Throws
// kUndefinedImprovement when b is zero.
double relative_improvement(double a, double b, Orientation orientation);

// Gate check on precomputed aggregate values and p-value.
bool passes_significance(double a, double b, double p_value,
                         Orientation orientation,
                         const SignificanceConfig& config);

/// True iff system `a` is significantly better than `b` on one metric.
///
/// The t-test runs on the per-query values of the queries both systems were
/// scored on; with fewer than two shared queries the test cannot pass.
bool significantly_better(const MetricSeries& a, const MetricSeries& b,
                          const SignificanceConfig& config);

struct SystemShift {
  std::string system_id;
  std::size_t n0 = 0;  // systems significantly better under the old metric
  std::size_t n1 = 0;  // ... under the new metric
  double delta_sort = 0.0;  // 100 * |n0 - n1| / |S|
};

struct DeltaSortResult {
  std::vector<SystemShift> systems;
  double max_delta_sort = 0.0;
};

// `old_metric[i]` and `new_metric[i]` both belong to `system_ids[i]`.
DeltaSortResult delta_sort(std::span<const std::string> system_ids,
                           std::span<const MetricSeries> old_metric,
                           std::span<const MetricSeries> new_metric,
                           const SignificanceConfig& config);

// Tie-aware Kendall tau-b. Throws kUndefinedMetric with fewer than two items
// or when either side is entirely tied.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
// Tau between two orderings (best first) of the same system-ids.
double kendall_tau(std::span<const std::string> ranking_a,
                   std::span<const std::string> ranking_b);

// Mean of new/old. Throws kUndefinedRatio on a zero old value.
double delta_value(std::span<const double> old_values,
                   std::span<const double> new_values);

enum class StdDevKind { kPopulation, kSample };

struct RangeSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double low() const { return mean - stddev; }
  double high() const { return mean + stddev; }
};

// NaN entries are skipped. Sample deviation of a single value is 0.
RangeSummary cross_track_summary(std::span<const double> values,
                                 StdDevKind kind = StdDevKind::kPopulation);

// --- Reordering protocol -----------------------------------------------------

struct TrackReorder {
  std::string track_id;
  MetricId from;
  MetricId to;
  DeltaSortResult delta_sort;
  double kendall = 0.0;      // NaN when undefined (all values tied)
  double delta_value = 0.0;  // NaN when undefined (zero old value)
};

/// Compares the system orderings a track gets from two metrics.
///
/// Kendall tau is taken over each metric's values in its own favorable
/// direction. For the value ratio, an ASL-family side is read as 1/ASL when
/// the other side is a rate.
TrackReorder reorder_track(const std::string& track_id,
                           std::span<const SystemScores> systems,
                           const MetricId& from, const MetricId& to,
                           const SignificanceConfig& config);

struct ReorderReport {
  std::string label;
  MetricId from;
  MetricId to;
  std::vector<TrackReorder> tracks;
  RangeSummary delta_sort;  // over per-track maxima
  RangeSummary kendall;
  RangeSummary delta_value;
};

ReorderReport summarize_reorder(std::string label, const MetricId& from,
                                const MetricId& to,
                                std::vector<TrackReorder> tracks,
                                StdDevKind kind = StdDevKind::kPopulation);

}  // namespace asl
