#include "asl/insight.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "asl/errors.hpp"

namespace asl {

namespace {

bool better(double a, double b, Orientation o) {
  return o == Orientation::kHigherBetter ? a > b : a < b;
}

// Slot for a non-negative-side lookup: -1 below, edges.size()-1 above.
long long slot_of(const std::vector<double>& edges, double v) {
  if (v < edges.front()) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<long long>(it - edges.begin()) - 1;
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

void require_search_lengths(std::span<const double> sl, const char* what) {
  if (sl.empty()) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + ": empty input");
  }
  for (double v : sl) {
    if (!(v >= 1.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidArgument,
                  std::string(what) + ": search lengths must be finite and >= 1");
    }
  }
}

}  // namespace

// --- Histograms --------------------------------------------------------------

void HistogramSpec::validate() const {
  if (edges.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "histogram needs at least two edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument, "histogram edges must increase strictly");
    }
  }
  if (!is_signed) return;
  if (edges.size() % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "signed histogram needs a central bucket straddling zero");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i] != -edges[edges.size() - 1 - i]) {
      throw Error(ErrorKind::kInvalidArgument, "signed histogram edges must be symmetric");
    }
  }
}

HistogramSpec HistogramSpec::geometric(double cap) {
  HistogramSpec spec;
  double e = 1.0;
  spec.edges.push_back(e);
  do {
    e *= 2.0;
    spec.edges.push_back(e);
  } while (e < cap);
  return spec;
}

HistogramSpec HistogramSpec::signed_log10() {
  HistogramSpec spec;
  spec.is_signed = true;
  spec.overflow_missing = false;
  spec.edges = {-1000, -100, -10, -1, -0.5, 0.5, 1, 10, 100, 1000};
  return spec;
}

std::size_t Histogram::total() const {
  std::size_t n = below + above + missing;
  for (auto c : counts) n += c;
  return n;
}

Histogram make_histogram(const HistogramSpec& spec) {
  spec.validate();
  Histogram h;
  h.edges = spec.edges;
  h.counts.assign(spec.edges.size() - 1, 0);
  return h;
}

void add_value(Histogram& hist, const HistogramSpec& spec, double value) {
  const long long buckets = static_cast<long long>(hist.counts.size());
  long long slot = 0;
  if (spec.is_signed && value < 0.0) {
    const long long mirror = slot_of(hist.edges, -value);
    slot = mirror >= buckets ? -1 : buckets - 1 - mirror;
  } else {
    slot = slot_of(hist.edges, value);
  }
  if (slot < 0) {
    ++hist.below;
  } else if (slot >= buckets) {
    ++hist.above;
  } else {
    ++hist.counts[static_cast<std::size_t>(slot)];
  }
}

Histogram asl_histogram(const SystemEval& eval, const HistogramSpec& spec) {
  Histogram h = make_histogram(spec);
  for (const auto& q : eval.queries) {
    for (const auto& d : q.docs) {
      if (!d.retrieved && spec.overflow_missing) {
        ++h.missing;
        continue;
      }
      // Retrieved docs always have ASL >= 1; only a degenerate missing doc
      // (ASL 0) can fall under an edge list starting at 1.
      assert(!d.retrieved || static_cast<double>(d.asl) >= 1.0);
      add_value(h, spec, static_cast<double>(d.asl));
    }
  }
  return h;
}

std::vector<long long> asl_deltas(const SystemEval& a, const SystemEval& b) {
  std::vector<long long> out;
  if (a.queries.size() != b.queries.size()) {
    throw Error(ErrorKind::kMatching, "systems were evaluated on different query sets");
  }
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    const QueryEval& qa = a.queries[i];
    const QueryEval& qb = b.queries[i];
    if (qa.query_id != qb.query_id || qa.docs.size() != qb.docs.size()) {
      throw Error(ErrorKind::kMatching, "query " + qa.query_id +
                                            " has different relevant documents");
    }
    std::map<std::string, std::size_t> asl_b;
    for (const auto& d : qb.docs) asl_b.emplace(d.doc_id, d.asl);
    for (const auto& d : qa.docs) {
      auto it = asl_b.find(d.doc_id);
      if (it == asl_b.end()) {
        throw Error(ErrorKind::kMatching,
                    "document " + d.doc_id + " of query " + qa.query_id +
                        " missing from second system");
      }
      out.push_back(static_cast<long long>(d.asl) - static_cast<long long>(it->second));
    }
  }
  return out;
}

Histogram delta_histogram(const SystemEval& a, const SystemEval& b,
                          const HistogramSpec& spec) {
  Histogram h = make_histogram(spec);
  for (long long d : asl_deltas(a, b)) add_value(h, spec, static_cast<double>(d));
  return h;
}

// --- Track-level summaries ---------------------------------------------------

BestValue best_system(std::span<const SystemScores> systems, const MetricId& metric) {
  const SystemScores* best = nullptr;
  for (const auto& s : systems) {
    if (!s.has(metric)) continue;
    if (best == nullptr) {
      best = &s;
      continue;
    }
    const double v = s.at(metric).aggregate;
    const double bv = best->at(metric).aggregate;
    if (better(v, bv, metric.orientation()) ||
        (v == bv && s.system_id < best->system_id))
      best = &s;
  }
  if (best == nullptr) {
    throw Error(ErrorKind::kLookup, "no system has a value for " + to_string(metric));
  }
  return {best->system_id, best->at(metric).aggregate};
}

std::vector<HeadroomRow> headroom_table(std::span<const TrackScores> tracks,
                                        std::span<const MetricId> metrics) {
  std::vector<HeadroomRow> rows;
  rows.reserve(tracks.size());
  for (const auto& t : tracks) {
    HeadroomRow row;
    row.track_id = t.track_id;
    for (const auto& m : metrics) {
      const bool any = std::any_of(t.systems.begin(), t.systems.end(),
                                   [&](const SystemScores& s) { return s.has(m); });
      if (any) row.best.emplace(m, best_system(t.systems, m));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Histogram headroom_distribution(std::span<const HeadroomRow> rows,
                                const MetricId& metric, const HistogramSpec& spec) {
  Histogram h = make_histogram(spec);
  for (const auto& r : rows) {
    auto it = r.best.find(metric);
    if (it != r.best.end()) add_value(h, spec, it->second.value);
  }
  return h;
}

HistogramSpec default_headroom_spec(const MetricId& metric) {
  HistogramSpec spec;
  spec.overflow_missing = false;
  if (metric.asl_family()) {
    spec.edges = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  } else {
    for (int i = 0; i <= 10; ++i) spec.edges.push_back(i / 10.0);
  }
  return spec;
}

std::string median_system(std::span<const SystemScores> systems,
                          const MetricId& metric) {
  std::vector<const SystemScores*> ranked;
  for (const auto& s : systems)
    if (s.has(metric)) ranked.push_back(&s);
  if (ranked.empty()) {
    throw Error(ErrorKind::kLookup, "no system has a value for " + to_string(metric));
  }
  std::sort(ranked.begin(), ranked.end(), [&](const SystemScores* a, const SystemScores* b) {
    const double va = a->at(metric).aggregate;
    const double vb = b->at(metric).aggregate;
    if (va != vb) return better(va, vb, metric.orientation());
    return a->system_id < b->system_id;
  });
  return ranked[(ranked.size() - 1) / 2]->system_id;
}

// --- Arithmetic vs harmonic averaging -----------------------------------------

double p_space_average_sl(std::span<const double> search_lengths) {
  require_search_lengths(search_lengths, "p_space_average_sl");
  double p_sum = 0.0;
  for (double sl : search_lengths) p_sum += 1.0 / sl;
  return static_cast<double>(search_lengths.size()) / p_sum;
}

TwoValueLimit two_value_limit_check(double sl1, std::span<const double> sl2_values) {
  TwoValueLimit out;
  out.limit = 2.0 * sl1;
  double prev = 0.0;
  for (double sl2 : sl2_values) {
    const double pair[] = {sl1, sl2};
    const double eq = p_space_average_sl(pair);
    if (!out.equivalent.empty() && eq < prev) out.monotone = false;
    out.equivalent.push_back(eq);
    prev = eq;
  }
  if (!out.equivalent.empty())
    out.final_relative_gap = std::fabs(out.equivalent.back() - out.limit) / out.limit;
  return out;
}

WeightedIdentity weighted_identity(std::span<const double> search_lengths,
                                   double tolerance) {
  require_search_lengths(search_lengths, "weighted_identity");
  WeightedIdentity out;
  double p_sum = 0.0;
  double weighted_sum = 0.0;
  double weight_sum = 0.0;
  for (double sl : search_lengths) {
    const double precision = 1.0 / sl;
    const double weight = 1.0 / sl;
    p_sum += precision;
    weighted_sum += sl * weight;
    weight_sum += weight;
  }
  out.p_space = static_cast<double>(search_lengths.size()) / p_sum;
  out.weighted = weighted_sum / weight_sum;
  out.holds = std::fabs(out.p_space - out.weighted) <=
              tolerance * std::max(1.0, std::fabs(out.p_space));
  return out;
}

PartitionResult effective_partition(std::span<const double> search_lengths) {
  require_search_lengths(search_lengths, "effective_partition");
  const std::vector<double> sl = sorted_copy(search_lengths);
  PartitionResult out;
  out.total = sl.size();
  out.target_sl = p_space_average_sl(sl);
  const double slack = 1e-12 * std::max(1.0, out.target_sl);

  double prefix = 0.0;
  double best_distance = 0.0;
  for (std::size_t n = 1; n <= sl.size(); ++n) {
    prefix += sl[n - 1];
    const double mean = prefix / static_cast<double>(n);
    const double distance = std::fabs(mean - out.target_sl);
    if (n == 1 || distance < best_distance - slack) {
      best_distance = distance;
      out.n = n;
      out.achieved_sl = mean;
    }
  }
  out.fraction = static_cast<double>(out.n) / static_cast<double>(out.total);
  return out;
}

EffectiveTop effective_top_fraction(const SystemEval& eval, PartitionLevel level) {
  EffectiveTop out;
  out.level = level;
  std::vector<double> pooled;
  for (const auto& q : eval.queries) {
    if (q.degenerate() || q.docs.empty()) continue;
    std::vector<double> sl;
    for (const auto& d : q.docs) sl.push_back(static_cast<double>(d.asl));
    if (level == PartitionLevel::kPerQuery) {
      out.parts.push_back(effective_partition(sl));
    } else {
      pooled.insert(pooled.end(), sl.begin(), sl.end());
    }
  }
  if (level == PartitionLevel::kPooled) {
    if (pooled.empty()) {
      throw Error(ErrorKind::kUndefinedMetric, "no non-degenerate documents");
    }
    out.parts.push_back(effective_partition(pooled));
    out.fraction = out.parts.front().fraction;
    return out;
  }
  if (out.parts.empty()) {
    throw Error(ErrorKind::kUndefinedMetric, "no non-degenerate queries");
  }
  double sum = 0.0;
  for (const auto& p : out.parts) sum += p.fraction;
  out.fraction = sum / static_cast<double>(out.parts.size());
  return out;
}

}  // namespace asl
