#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asl/trec_io.hpp"

namespace asl {

/// Evaluation of one judged-relevant document for one query.
struct PerDocEval {
  std::string query_id;
  std::string doc_id;
  bool retrieved = false;
  std::size_t rank = 0;         // 1-based; 0 when not retrieved
  std::size_t rel_above = 0;    // relevant docs ranked above this one
  std::size_t irrel_above = 0;  // irrelevant or unjudged docs ranked above
  std::size_t asl = 0;          // atomized search length
  double precision = 0.0;       // (rel_above + 1) / rank, 0 when missing
};

struct QueryEval {
  std::string query_id;
  std::size_t n_rel = 0;        // judged-relevant documents
  std::size_t retrieved = 0;    // length of the system's list
  std::size_t irrel_total = 0;  // irrelevant or unjudged docs in the list
  // Retrieved relevant docs by rank, then missing ones by doc-id.
  std::vector<PerDocEval> docs;

  std::size_t missing() const;
  // A missing relevant doc whose fallback search length is zero: the list was
  // empty or held only relevant documents.
  bool degenerate() const { return irrel_total == 0 && missing() > 0; }
  // Mean per-document ASL for this query.
  double mean_asl() const;
};

/// Evaluates one query. Returns nullopt when the query has no relevant
/// document, which callers treat as "exclude", not as an error.
///
/// Unjudged retrieved documents count as irrelevant. `ranking` must already be
/// in final rank order.
std::optional<QueryEval> evaluate_query(const Qrels& qrels,
                                        const std::string& query_id,
                                        std::span<const ScoredDoc> ranking);

// Aggregate ASL: mean over queries of the per-query mean ASL. Throws
// kUndefinedMetric on an empty query set.
double asl_all(std::span<const QueryEval> queries);
double asl_at_g_query(const QueryEval& query, std::size_t n);
double asl_at_g(std::span<const QueryEval> queries, std::size_t n);

double average_precision(const QueryEval& query);
double mean_average_precision(std::span<const double> average_precisions);
double mean_average_precision(std::span<const QueryEval> queries);

// Relevant docs in the top k divided by k.
double precision_at_k(const Qrels& qrels, const std::string& query_id,
                      std::span<const ScoredDoc> ranking, std::size_t k);
// Reciprocal rank of the first relevant document, or 0.
double reciprocal_rank(const Qrels& qrels, const std::string& query_id,
                       std::span<const ScoredDoc> ranking);
// Same values read off an evaluated query.
double precision_at_k(const QueryEval& query, std::size_t k);
double reciprocal_rank(const QueryEval& query);

/// Intermediate metrics between MAP and ASL.
///
/// kAtomize replaces each per-doc precision with 1/ASL and keeps both
/// arithmetic means; kHarmonicWithin switches the per-query mean to harmonic;
/// kHarmonicBoth makes the cross-query mean harmonic too, which is exactly
/// 1/ASL.
enum class AblationStage { kAtomize, kHarmonicWithin, kHarmonicBoth };

// Atomized precision of one document; the missing-document value is 1/irrel_q.
double atomized_precision(const PerDocEval& doc);
// Per-query value of a stage (kHarmonicWithin and kHarmonicBoth coincide).
double ablation_query_value(const QueryEval& query, AblationStage stage);
// Throws kDegenerateQuery if any query is degenerate.
double ablation_metric(std::span<const QueryEval> queries, AblationStage stage);

enum class RrieKind { kPrecisionStyle, kAslStyle };

/// Relative reduction in error from `baseline` to `improved`. Error is 1-P for
/// precision-style values and ASL-1 for ASL-style values. Negative when the
/// improved value is worse.
double rrie(double baseline, double improved, RrieKind kind);

// --- Metric identities and per-system scores -------------------------------

enum class Orientation { kHigherBetter, kLowerBetter };

enum class MetricKind { kAsl, kAslAtG, kMap, kPrecisionAtK, kMrr, kM1, kM2, kM3 };

struct MetricId {
  MetricKind kind = MetricKind::kAsl;
  std::size_t param = 0;  // n for ASL@g1-n, k for P@k

  static MetricId asl() { return {MetricKind::kAsl, 0}; }
  static MetricId asl_at_g(std::size_t n) { return {MetricKind::kAslAtG, n}; }
  static MetricId map() { return {MetricKind::kMap, 0}; }
  static MetricId precision_at(std::size_t k) {
    return {MetricKind::kPrecisionAtK, k};
  }
  static MetricId mrr() { return {MetricKind::kMrr, 0}; }
  static MetricId ablation(AblationStage stage);

  Orientation orientation() const;
  // ASL, ASL@g1-n: values are search lengths rather than rates.
  bool asl_family() const;
  RrieKind rrie_kind() const {
    return asl_family() ? RrieKind::kAslStyle : RrieKind::kPrecisionStyle;
  }

  friend auto operator<=>(const MetricId&, const MetricId&) = default;
};

// Canonical names: asl, asl@g1-N, map, p@K, mrr, m1, m2, m3.
std::string to_string(const MetricId& id);
// Also accepts ASL@g1-10, asl@g10, P@20, P20, and the stage aliases
// atomize, harmonic-within, harmonic-both. Throws kInvalidArgument.
MetricId parse_metric(const std::string& name);

struct MetricSeries {
  Orientation orientation = Orientation::kHigherBetter;
  double aggregate = 0.0;
  std::map<std::string, double> per_query;  // query-id -> value
};

struct SystemEval {
  std::string system_id;
  std::vector<QueryEval> queries;  // sorted by query-id
  Warnings warnings;

  const QueryEval* find_query(const std::string& query_id) const;
  // Queries that are not degenerate, the population for ASL-family and
  // ablation aggregates.
  std::vector<QueryEval> regular_queries() const;
  std::size_t relevant_pairs() const;
};

struct SystemScores {
  std::string system_id;
  std::map<MetricId, MetricSeries> metrics;
  std::vector<std::string> degenerate_queries;

  const MetricSeries& at(const MetricId& id) const;
  bool has(const MetricId& id) const { return metrics.contains(id); }
};

/// Evaluates every query of `qrels` that has a relevant document. Queries the
/// run never answered are evaluated against an empty list; run queries that
/// are absent from the qrels are dropped with a warning.
SystemEval evaluate_run(const Qrels& qrels, const RunList& run);

/// Computes the requested metrics. Degenerate queries are left out of the
/// ASL-family and ablation metrics (with a warning in `eval`); MAP, P@k and
/// MRR use every evaluated query.
/// A metric with no eligible query (every query degenerate) is omitted from
/// `metrics`.
SystemScores score_system(const SystemEval& eval,
                          std::span<const MetricId> metrics);

// ASL, ASL@g1-1, ASL@g1-10, MAP, P@20, MRR, M1, M2, M3.
std::vector<MetricId> default_metrics();

}  // namespace asl
