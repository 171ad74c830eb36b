#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "asl/metrics.hpp"

namespace asl {

// --- Histograms --------------------------------------------------------------

/// Bucket layout for per-document ASL values or signed ASL deltas.
///
/// Buckets are [edge_i, edge_{i+1}); values at or past the last edge land in
/// the upper overflow and values below the first edge in the lower one. A
/// signed spec must be symmetric around zero with zero strictly inside the
/// central bucket; negative values are placed by mirroring their magnitude so
/// that swapping the operands of a delta mirrors the counts exactly.
struct HistogramSpec {
  std::vector<double> edges;
  bool overflow_missing = true;  // unretrieved docs get their own bucket
  bool is_signed = false;

  void validate() const;

  // 1, 2, 4, ... up to the first power of two >= cap.
  static HistogramSpec geometric(double cap = 1024.0);
  // +-0.5 around zero, then +-1, 10, 100, 1000.
  static HistogramSpec signed_log10();
};

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;  // edges.size() - 1 buckets
  std::size_t below = 0;            // < first edge (signed: most negative)
  std::size_t above = 0;            // >= last edge
  std::size_t missing = 0;          // unretrieved docs, when requested

  std::size_t total() const;
};

Histogram make_histogram(const HistogramSpec& spec);
void add_value(Histogram& hist, const HistogramSpec& spec, double value);

// Counts every judged-relevant document of the system, degenerate queries
// included.
Histogram asl_histogram(const SystemEval& eval, const HistogramSpec& spec);

// Per-document ASL(a) - ASL(b), keyed by (query-id, doc-id). Negative means a
// ranked the document higher. Throws kMatching if the document sets differ.
std::vector<long long> asl_deltas(const SystemEval& a, const SystemEval& b);
Histogram delta_histogram(const SystemEval& a, const SystemEval& b,
                          const HistogramSpec& spec);

// --- Track-level summaries ---------------------------------------------------

struct TrackScores {
  std::string track_id;
  std::vector<SystemScores> systems;
};

struct BestValue {
  std::string system_id;
  double value = 0.0;
};

struct HeadroomRow {
  std::string track_id;
  std::map<MetricId, BestValue> best;
};

// Best system per metric honoring orientation; ties go to the smaller id.
// Throws kLookup if no system has the metric.
BestValue best_system(std::span<const SystemScores> systems, const MetricId& metric);
std::vector<HeadroomRow> headroom_table(std::span<const TrackScores> tracks,
                                        std::span<const MetricId> metrics);
// Distribution of one metric's best values across tracks.
Histogram headroom_distribution(std::span<const HeadroomRow> rows,
                                const MetricId& metric,
                                const HistogramSpec& spec);
// Rates: 0, 0.1, ..., 1.0. Search lengths: 1, 2, 5, 10, ..., 1000.
HistogramSpec default_headroom_spec(const MetricId& metric);

// System at index floor((|S|-1)/2) after sorting best-first (ties by id).
std::string median_system(std::span<const SystemScores> systems,
                          const MetricId& metric);

// --- Arithmetic vs harmonic averaging of search lengths -----------------------

// Search length implied by averaging the precisions 1/SL: the harmonic mean.
double p_space_average_sl(std::span<const double> search_lengths);

struct TwoValueLimit {
  double limit = 0.0;                 // 2 * SL1
  std::vector<double> equivalent;     // one per SL2
  bool monotone = true;               // non-decreasing in SL2
  double final_relative_gap = 0.0;    // |last - limit| / limit
};

// Equivalent SL of the pair (sl1, sl2) for each sl2, which must be ascending.
TwoValueLimit two_value_limit_check(double sl1, std::span<const double> sl2_values);

struct WeightedIdentity {
  double p_space = 0.0;   // n / sum(P_i)
  double weighted = 0.0;  // sum(SL_i * w_i) / sum(w_i), w_i = 1 / SL_i
  bool holds = false;
};

WeightedIdentity weighted_identity(std::span<const double> search_lengths,
                                   double tolerance = 1e-12);
inline bool weighted_identity_check(std::span<const double> search_lengths,
                                    double tolerance = 1e-12) {
  return weighted_identity(search_lengths, tolerance).holds;
}

struct PartitionResult {
  std::size_t n = 0;        // prefix length
  std::size_t total = 0;
  double fraction = 0.0;    // n / total
  double target_sl = 0.0;   // harmonic mean of the inputs
  double achieved_sl = 0.0; // arithmetic mean of the n smallest
};

/// Smallest-first prefix whose arithmetic mean is closest to the harmonic mean
/// of all inputs. Ties resolve to the shorter prefix.
PartitionResult effective_partition(std::span<const double> search_lengths);

enum class PartitionLevel { kPerQuery, kPooled };

struct EffectiveTop {
  PartitionLevel level = PartitionLevel::kPerQuery;
  double fraction = 0.0;  // per-query: mean over queries
  std::vector<PartitionResult> parts;  // one per query, or one pooled
};

// Uses per-document ASL values of the non-degenerate queries.
EffectiveTop effective_top_fraction(const SystemEval& eval, PartitionLevel level);

}  // namespace asl
