#include "asl/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <unordered_set>

#include "asl/errors.hpp"

namespace asl {

namespace {

void require_queries(std::span<const QueryEval> queries, const char* what) {
  if (queries.empty()) {
    throw Error(ErrorKind::kUndefinedMetric,
                std::string(what) + " over an empty query set");
  }
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

// --- Per-query evaluation --------------------------------------------------

std::size_t QueryEval::missing() const {
  return static_cast<std::size_t>(
      std::count_if(docs.begin(), docs.end(),
                    [](const PerDocEval& d) { return !d.retrieved; }));
}

double QueryEval::mean_asl() const {
  if (docs.empty()) {
    throw Error(ErrorKind::kUndefinedMetric,
                "query " + query_id + " has no relevant documents");
  }
  double sum = 0.0;
  for (const auto& d : docs) sum += static_cast<double>(d.asl);
  return sum / static_cast<double>(docs.size());
}

std::optional<QueryEval> evaluate_query(const Qrels& qrels,
                                        const std::string& query_id,
                                        std::span<const ScoredDoc> ranking) {
  auto relevant = qrels.relevant_docs(query_id);
  if (relevant.empty()) return std::nullopt;

  QueryEval out;
  out.query_id = query_id;
  out.n_rel = relevant.size();
  out.retrieved = ranking.size();
  out.docs.reserve(relevant.size());

  std::unordered_set<std::string> found;
  std::size_t rel_seen = 0;
  std::size_t irrel_seen = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const std::string& doc = ranking[i].doc_id;
    if (!qrels.is_relevant(query_id, doc)) {
      ++irrel_seen;
      continue;
    }
    PerDocEval d;
    d.query_id = query_id;
    d.doc_id = doc;
    d.retrieved = true;
    d.rank = i + 1;
    d.rel_above = rel_seen;
    d.irrel_above = irrel_seen;
    d.asl = irrel_seen + 1;
    d.precision = static_cast<double>(rel_seen + 1) / static_cast<double>(d.rank);
    out.docs.push_back(std::move(d));
    found.insert(doc);
    ++rel_seen;
  }
  out.irrel_total = irrel_seen;

  for (const auto& doc : relevant) {
    if (found.contains(doc)) continue;
    PerDocEval d;
    d.query_id = query_id;
    d.doc_id = doc;
    d.asl = out.irrel_total;
    out.docs.push_back(std::move(d));
  }
  return out;
}

// --- ASL -------------------------------------------------------------------

double asl_all(std::span<const QueryEval> queries) {
  require_queries(queries, "ASL");
  double sum = 0.0;
  for (const auto& q : queries) sum += q.mean_asl();
  return sum / static_cast<double>(queries.size());
}

double asl_at_g_query(const QueryEval& query, std::size_t n) {
  if (n == 0) {
    throw Error(ErrorKind::kInvalidArgument, "ASL@g1-n needs n >= 1");
  }
  const std::size_t m = std::min(n, query.docs.size());
  if (m == 0) {
    throw Error(ErrorKind::kUndefinedMetric,
                "query " + query.query_id + " has no relevant documents");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += static_cast<double>(query.docs[i].asl);
  return sum / static_cast<double>(m);
}

double asl_at_g(std::span<const QueryEval> queries, std::size_t n) {
  require_queries(queries, "ASL@g1-n");
  double sum = 0.0;
  for (const auto& q : queries) sum += asl_at_g_query(q, n);
  return sum / static_cast<double>(queries.size());
}

// --- Precision family ------------------------------------------------------

double average_precision(const QueryEval& query) {
  if (query.n_rel == 0) {
    throw Error(ErrorKind::kUndefinedMetric,
                "query " + query.query_id + " has no relevant documents");
  }
  double sum = 0.0;
  for (const auto& d : query.docs) sum += d.precision;
  return sum / static_cast<double>(query.n_rel);
}

double mean_average_precision(std::span<const double> average_precisions) {
  if (average_precisions.empty()) {
    throw Error(ErrorKind::kUndefinedMetric, "MAP over an empty query set");
  }
  return mean_of(average_precisions);
}

double mean_average_precision(std::span<const QueryEval> queries) {
  require_queries(queries, "MAP");
  std::vector<double> aps;
  aps.reserve(queries.size());
  for (const auto& q : queries) aps.push_back(average_precision(q));
  return mean_of(aps);
}

double precision_at_k(const Qrels& qrels, const std::string& query_id,
                      std::span<const ScoredDoc> ranking, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "P@k needs k >= 1");
  const std::size_t depth = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i)
    if (qrels.is_relevant(query_id, ranking[i].doc_id)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double reciprocal_rank(const Qrels& qrels, const std::string& query_id,
                       std::span<const ScoredDoc> ranking) {
  for (std::size_t i = 0; i < ranking.size(); ++i)
    if (qrels.is_relevant(query_id, ranking[i].doc_id))
      return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double precision_at_k(const QueryEval& query, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "P@k needs k >= 1");
  std::size_t hits = 0;
  for (const auto& d : query.docs)
    if (d.retrieved && d.rank <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double reciprocal_rank(const QueryEval& query) {
  // Retrieved docs come first, in rank order.
  if (query.docs.empty() || !query.docs.front().retrieved) return 0.0;
  return 1.0 / static_cast<double>(query.docs.front().rank);
}

// --- Ablation chain --------------------------------------------------------

double atomized_precision(const PerDocEval& doc) {
  if (doc.asl == 0) {
    throw Error(ErrorKind::kDegenerateQuery,
                "query " + doc.query_id + ": missing document " + doc.doc_id +
                    " has a zero search length (no irrelevant predictions)");
  }
  return 1.0 / static_cast<double>(doc.asl);
}

namespace {

// Mean search length of one query after validating every atomized precision.
// Harmonic stages are computed as reciprocals of these means, so they match
// 1/ASL bit for bit.
double query_search_length(const QueryEval& query) {
  double sum = 0.0;
  for (const auto& d : query.docs) {
    atomized_precision(d);
    sum += static_cast<double>(d.asl);
  }
  return sum / static_cast<double>(query.docs.size());
}

}  // namespace

double ablation_query_value(const QueryEval& query, AblationStage stage) {
  if (query.docs.empty()) {
    throw Error(ErrorKind::kUndefinedMetric,
                "query " + query.query_id + " has no relevant documents");
  }
  if (stage == AblationStage::kAtomize) {
    double sum = 0.0;
    for (const auto& d : query.docs) sum += atomized_precision(d);
    return sum / static_cast<double>(query.docs.size());
  }
  return 1.0 / query_search_length(query);
}

double ablation_metric(std::span<const QueryEval> queries, AblationStage stage) {
  require_queries(queries, "ablation metric");
  const double n = static_cast<double>(queries.size());
  if (stage == AblationStage::kHarmonicBoth) {
    double sum = 0.0;
    for (const auto& q : queries) {
      if (q.docs.empty()) {
        throw Error(ErrorKind::kUndefinedMetric,
                    "query " + q.query_id + " has no relevant documents");
      }
      sum += query_search_length(q);
    }
    return 1.0 / (sum / n);
  }
  double sum = 0.0;
  for (const auto& q : queries) sum += ablation_query_value(q, stage);
  return sum / n;
}

// --- RRIE ------------------------------------------------------------------

double rrie(double baseline, double improved, RrieKind kind) {
  const double base_error =
      kind == RrieKind::kPrecisionStyle ? 1.0 - baseline : baseline - 1.0;
  const double new_error =
      kind == RrieKind::kPrecisionStyle ? 1.0 - improved : improved - 1.0;
  if (base_error == 0.0) {
    throw Error(ErrorKind::kZeroErrorBaseline,
                "baseline is already optimal; relative error reduction is "
                "undefined");
  }
  return (base_error - new_error) / base_error;
}

// --- Metric identities -----------------------------------------------------

MetricId MetricId::ablation(AblationStage stage) {
  switch (stage) {
    case AblationStage::kAtomize: return {MetricKind::kM1, 0};
    case AblationStage::kHarmonicWithin: return {MetricKind::kM2, 0};
    case AblationStage::kHarmonicBoth: return {MetricKind::kM3, 0};
  }
  return {MetricKind::kM1, 0};
}

bool MetricId::asl_family() const {
  return kind == MetricKind::kAsl || kind == MetricKind::kAslAtG;
}

Orientation MetricId::orientation() const {
  return asl_family() ? Orientation::kLowerBetter : Orientation::kHigherBetter;
}

std::string to_string(const MetricId& id) {
  switch (id.kind) {
    case MetricKind::kAsl: return "asl";
    case MetricKind::kAslAtG: return "asl@g1-" + std::to_string(id.param);
    case MetricKind::kMap: return "map";
    case MetricKind::kPrecisionAtK: return "p@" + std::to_string(id.param);
    case MetricKind::kMrr: return "mrr";
    case MetricKind::kM1: return "m1";
    case MetricKind::kM2: return "m2";
    case MetricKind::kM3: return "m3";
  }
  return "?";
}

namespace {

std::optional<std::size_t> parse_positive(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    return std::nullopt;
  return v;
}

}  // namespace

MetricId parse_metric(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  if (s == "asl") return MetricId::asl();
  if (s == "map" || s == "ap") return MetricId::map();
  if (s == "mrr" || s == "rr") return MetricId::mrr();
  if (s == "m1" || s == "atomize") return MetricId::ablation(AblationStage::kAtomize);
  if (s == "m2" || s == "harmonic-within")
    return MetricId::ablation(AblationStage::kHarmonicWithin);
  if (s == "m3" || s == "harmonic-both")
    return MetricId::ablation(AblationStage::kHarmonicBoth);

  std::string_view v(s);
  if (v.starts_with("asl@g")) {
    v.remove_prefix(5);
    if (v.starts_with("1-")) v.remove_prefix(2);
    if (auto n = parse_positive(v)) return MetricId::asl_at_g(*n);
  } else if (v.starts_with("p@") || v.starts_with("p_")) {
    if (auto k = parse_positive(v.substr(2))) return MetricId::precision_at(*k);
  } else if (v.starts_with("p")) {
    if (auto k = parse_positive(v.substr(1))) return MetricId::precision_at(*k);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown metric '" + name + "'");
}

// --- Systems ---------------------------------------------------------------

const QueryEval* SystemEval::find_query(const std::string& query_id) const {
  auto it = std::lower_bound(
      queries.begin(), queries.end(), query_id,
      [](const QueryEval& q, const std::string& id) { return q.query_id < id; });
  if (it == queries.end() || it->query_id != query_id) return nullptr;
  return &*it;
}

std::vector<QueryEval> SystemEval::regular_queries() const {
  std::vector<QueryEval> out;
  out.reserve(queries.size());
  for (const auto& q : queries)
    if (!q.degenerate()) out.push_back(q);
  return out;
}

std::size_t SystemEval::relevant_pairs() const {
  std::size_t n = 0;
  for (const auto& q : queries) n += q.docs.size();
  return n;
}

const MetricSeries& SystemScores::at(const MetricId& id) const {
  auto it = metrics.find(id);
  if (it == metrics.end()) {
    throw Error(ErrorKind::kLookup,
                "system " + system_id + " has no value for " + to_string(id));
  }
  return it->second;
}

SystemEval evaluate_run(const Qrels& qrels, const RunList& run) {
  SystemEval out;
  out.system_id = run.system_id;
  for (const auto& [query, docs] : run.rankings) {
    if (!qrels.has_query(query)) {
      out.warnings.push_back(run.system_id + ": query " + query +
                             " has no judgments; dropped");
    }
  }
  static const std::vector<ScoredDoc> kEmpty;
  for (const auto& query : qrels.evaluable_query_ids()) {
    const auto* ranking = run.ranking_for(query);
    auto eval = evaluate_query(qrels, query, ranking ? *ranking : kEmpty);
    if (!eval) continue;
    if (eval->degenerate()) {
      out.warnings.push_back(
          run.system_id + ": query " + query +
          " is degenerate (missing relevant documents, no irrelevant "
          "predictions); excluded from ASL-family and ablation metrics");
    }
    out.queries.push_back(std::move(*eval));
  }
  return out;
}

SystemScores score_system(const SystemEval& eval,
                          std::span<const MetricId> metrics) {
  SystemScores out;
  out.system_id = eval.system_id;
  for (const auto& q : eval.queries)
    if (q.degenerate()) out.degenerate_queries.push_back(q.query_id);
  const std::vector<QueryEval> regular = eval.regular_queries();

  for (const MetricId& id : metrics) {
    const bool needs_regular =
        id.asl_family() || id.kind == MetricKind::kM1 ||
        id.kind == MetricKind::kM2 || id.kind == MetricKind::kM3;
    const std::vector<QueryEval>& population = needs_regular ? regular : eval.queries;
    if (population.empty()) continue;

    MetricSeries series;
    series.orientation = id.orientation();
    for (const auto& q : population) {
      double v = 0.0;
      switch (id.kind) {
        case MetricKind::kAsl: v = q.mean_asl(); break;
        case MetricKind::kAslAtG: v = asl_at_g_query(q, id.param); break;
        case MetricKind::kMap: v = average_precision(q); break;
        case MetricKind::kPrecisionAtK: v = precision_at_k(q, id.param); break;
        case MetricKind::kMrr: v = reciprocal_rank(q); break;
        case MetricKind::kM1: v = ablation_query_value(q, AblationStage::kAtomize); break;
        case MetricKind::kM2: v = ablation_query_value(q, AblationStage::kHarmonicWithin); break;
        case MetricKind::kM3: v = ablation_query_value(q, AblationStage::kHarmonicBoth); break;
      }
      series.per_query.emplace(q.query_id, v);
    }
    switch (id.kind) {
      case MetricKind::kAsl: series.aggregate = asl_all(population); break;
      case MetricKind::kAslAtG: series.aggregate = asl_at_g(population, id.param); break;
      case MetricKind::kMap: series.aggregate = mean_average_precision(population); break;
      case MetricKind::kM1:
        series.aggregate = ablation_metric(population, AblationStage::kAtomize);
        break;
      case MetricKind::kM2:
        series.aggregate = ablation_metric(population, AblationStage::kHarmonicWithin);
        break;
      case MetricKind::kM3:
        series.aggregate = ablation_metric(population, AblationStage::kHarmonicBoth);
        break;
      case MetricKind::kPrecisionAtK:
      case MetricKind::kMrr: {
        double sum = 0.0;
        for (const auto& [q, v] : series.per_query) sum += v;
        series.aggregate = sum / static_cast<double>(series.per_query.size());
        break;
      }
    }
    out.metrics.emplace(id, std::move(series));
  }
  return out;
}

std::vector<MetricId> default_metrics() {
  return {MetricId::asl(),
          MetricId::asl_at_g(1),
          MetricId::asl_at_g(10),
          MetricId::map(),
          MetricId::precision_at(20),
          MetricId::mrr(),
          MetricId::ablation(AblationStage::kAtomize),
          MetricId::ablation(AblationStage::kHarmonicWithin),
          MetricId::ablation(AblationStage::kHarmonicBoth)};
}

}  // namespace asl
