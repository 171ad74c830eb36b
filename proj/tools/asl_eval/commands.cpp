#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "asl/errors.hpp"
#include "asl/parallel.hpp"
#include "cli.hpp"

namespace asl::cli {

namespace fs = std::filesystem;

namespace {

// Search lengths of the reference example, and the equal-weight list
// reported to average to the same value.
constexpr double kAppendixSearchLengths[] = {1, 1, 1, 2, 4, 5, 10, 10000, 10000};
constexpr double kAppendixTransformed[] = {1, 1, 1, 2.1, 2.7, 2.9, 3, 3.2, 3.2};

struct LoadedTrack {
  TrackBundle bundle;
  std::vector<SystemEval> evals;  // parallel to bundle.runs
  TrackScores scores;
};

std::size_t first_k(const RunConfig& c) {
  return c.k_values.empty() ? 20 : c.k_values.front();
}

std::size_t largest_g(const RunConfig& c) {
  return c.g_values.empty() ? 10 : *std::max_element(c.g_values.begin(), c.g_values.end());
}

std::vector<MetricId> parse_metrics(const std::vector<std::string>& names) {
  std::vector<MetricId> out;
  for (const auto& n : names) out.push_back(parse_metric(n));
  return out;
}

std::vector<MetricId> eval_metrics(const RunConfig& c) {
  if (!c.metrics.empty()) return parse_metrics(c.metrics);
  std::vector<MetricId> out{MetricId::asl()};
  for (auto g : c.g_values) out.push_back(MetricId::asl_at_g(g));
  out.push_back(MetricId::map());
  for (auto k : c.k_values) out.push_back(MetricId::precision_at(k));
  out.push_back(MetricId::mrr());
  out.push_back(MetricId::ablation(AblationStage::kAtomize));
  out.push_back(MetricId::ablation(AblationStage::kHarmonicWithin));
  out.push_back(MetricId::ablation(AblationStage::kHarmonicBoth));
  return out;
}

// P@K, ASL@g1-G, MAP, ASL: the top-ranked and all-document pairs.
std::vector<MetricId> table_metrics(const RunConfig& c) {
  if (!c.metrics.empty()) return parse_metrics(c.metrics);
  return {MetricId::precision_at(first_k(c)), MetricId::asl_at_g(largest_g(c)),
          MetricId::map(), MetricId::asl()};
}

TrackOptions track_options(const RunConfig& c, std::size_t default_min_runs,
                           unsigned jobs) {
  TrackOptions o;
  o.relevance_threshold = c.threshold;
  o.run_options.policy = c.order;
  o.run_options.dedupe_keep_best = c.dedupe;
  o.min_runs = c.min_runs.value_or(default_min_runs);
  o.jobs = jobs;
  return o;
}

std::vector<LoadedTrack> load_inputs(const RunConfig& c, std::size_t default_min_runs,
                                     std::span<const MetricId> metrics,
                                     Warnings& warnings) {
  std::vector<LoadedTrack> tracks;
  if (!c.qrels.empty() || !c.runs_dir.empty()) {
    if (c.qrels.empty() || c.runs_dir.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "--qrels and --runs-dir go together");
    }
    fs::path runs(c.runs_dir);
    std::string id = fs::absolute(runs).lexically_normal().parent_path().filename().string();
    tracks.push_back({load_track(c.qrels, runs, track_options(c, default_min_runs, c.jobs),
                                 id.empty() ? "track" : id),
                      {},
                      {}});
  } else if (!c.tracks_dir.empty()) {
    fs::path root(c.tracks_dir);
    if (fs::is_regular_file(root / "qrels.txt")) {
      tracks.push_back(
          {discover_track(root, track_options(c, default_min_runs, c.jobs)), {}, {}});
    } else {
      const auto dirs = list_track_dirs(root);
      if (dirs.empty()) {
        throw Error(ErrorKind::kLayout, "no track directories under " + root.string());
      }
      std::vector<std::optional<TrackBundle>> loaded(dirs.size());
      std::vector<std::string> skipped(dirs.size());
      const TrackOptions opts = track_options(c, default_min_runs, 1);
      parallel_for(dirs.size(), c.jobs, [&](std::size_t i) {
        try {
          loaded[i] = discover_track(dirs[i], opts);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kInsufficientRuns) throw;
          skipped[i] = e.what();
        }
      });
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (loaded[i]) {
          tracks.push_back({std::move(*loaded[i]), {}, {}});
        } else {
          warnings.push_back("skipping track " + dirs[i].filename().string() + ": " +
                             skipped[i]);
        }
      }
      if (tracks.empty()) {
        throw Error(ErrorKind::kInsufficientRuns, "no track under " + root.string() +
                                                      " has enough runs");
      }
    }
  } else {
    throw Error(ErrorKind::kInvalidArgument,
                "no input: pass --qrels with --runs-dir, or --tracks-dir");
  }

  // Evaluate every (track, run) pair; slots keep the result order fixed.
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    tracks[t].evals.resize(tracks[t].bundle.runs.size());
    tracks[t].scores.track_id = tracks[t].bundle.track_id;
    tracks[t].scores.systems.resize(tracks[t].bundle.runs.size());
    for (std::size_t r = 0; r < tracks[t].bundle.runs.size(); ++r) work.emplace_back(t, r);
  }
  parallel_for(work.size(), c.jobs, [&](std::size_t i) {
    auto [t, r] = work[i];
    LoadedTrack& track = tracks[t];
    track.evals[r] = evaluate_run(track.bundle.qrels, track.bundle.runs[r]);
    track.scores.systems[r] = score_system(track.evals[r], metrics);
  });

  for (auto& t : tracks) {
    for (const auto& w : t.bundle.warnings) warnings.push_back(t.bundle.track_id + ": " + w);
    for (const auto& e : t.evals)
      for (const auto& w : e.warnings) warnings.push_back(t.bundle.track_id + ": " + w);
  }
  return tracks;
}

std::pair<MetricId, std::pair<double, double>> parse_value_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  const auto comma = spec.find(',', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || comma == std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument,
                "expected NAME=BASELINE,CANDIDATE, got '" + spec + "'");
  }
  try {
    std::size_t used = 0;
    const std::string a = spec.substr(eq + 1, comma - eq - 1);
    const std::string b = spec.substr(comma + 1);
    const double base = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    const double cand = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    return {parse_metric(spec.substr(0, eq)), {base, cand}};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::kInvalidArgument, "bad number in '" + spec + "'");
  }
}

std::vector<std::pair<MetricId, std::pair<double, double>>> read_values_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kLayout, "cannot open values file " + path);
  std::vector<std::pair<MetricId, std::pair<double, double>>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string name, base, cand;
    if (!(fields >> name) || name.starts_with('#')) continue;
    if (line_no == 1 && name == "metric") continue;  // header
    if (!(fields >> base >> cand)) {
      throw ParseError(ErrorKind::kParse, path, line_no,
                       "expected 3 columns (metric baseline candidate)");
    }
    out.push_back(parse_value_spec(name + "=" + base + "," + cand));
  }
  return out;
}

struct Comparison {
  std::string label;
  MetricId from;
  MetricId to;
};

std::vector<Comparison> reorder_plan(const RunConfig& c) {
  std::vector<Comparison> plan;
  if (!c.metrics.empty()) {
    const auto ids = parse_metrics(c.metrics);
    if (ids.size() < 2) {
      throw Error(ErrorKind::kInvalidArgument, "reorder needs at least two --metric values");
    }
    for (std::size_t i = 1; i < ids.size(); ++i)
      plan.push_back({to_string(ids[i - 1]) + "->" + to_string(ids[i]), ids[i - 1], ids[i]});
    return plan;
  }
  const MetricId m1 = MetricId::ablation(AblationStage::kAtomize);
  const MetricId m2 = MetricId::ablation(AblationStage::kHarmonicWithin);
  const MetricId m3 = MetricId::ablation(AblationStage::kHarmonicBoth);
  const bool ablation = c.preset == "ablation" || c.preset == "all";
  const bool top = c.preset == "top" || c.preset == "all";
  if (!ablation && !top) {
    throw Error(ErrorKind::kInvalidArgument, "unknown preset '" + c.preset + "'");
  }
  if (ablation) {
    plan.push_back({"atomize-p", MetricId::map(), m1});
    plan.push_back({"harmonic-within-query", m1, m2});
    plan.push_back({"harmonic-across-queries", m2, m3});
    plan.push_back({"cumulative", MetricId::map(), MetricId::asl()});
  }
  if (top) {
    plan.push_back({"top-ranked", MetricId::precision_at(first_k(c)),
                    MetricId::asl_at_g(largest_g(c))});
    plan.push_back({"first-relevant", MetricId::mrr(), MetricId::asl_at_g(1)});
  }
  return plan;
}

const SystemScores* find_scores(const TrackScores& t, const std::string& id) {
  for (const auto& s : t.systems)
    if (s.system_id == id) return &s;
  return nullptr;
}

std::vector<double> log_uniform_vector(std::mt19937_64& rng, std::size_t max_len,
                                       double hi) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> expo(0.0, std::log(hi));
  std::vector<double> v(len(rng));
  for (auto& x : v) x = std::max(1.0, std::exp(expo(rng)));
  return v;
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  for (auto g : g_values)
    if (g == 0) throw Error(ErrorKind::kInvalidArgument, "--g values must be >= 1");
  for (auto k : k_values)
    if (k == 0) throw Error(ErrorKind::kInvalidArgument, "--k values must be >= 1");
  if (jobs == 0) throw Error(ErrorKind::kInvalidArgument, "--jobs must be >= 1");
  significance.validate();
}

bool OracleReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const OracleCheck& c) { return c.passed; });
}

// --- Commands ------------------------------------------------------------------

EvalReport cmd_eval(const RunConfig& config) {
  EvalReport report;
  report.metrics = eval_metrics(config);
  auto tracks = load_inputs(config, 1, report.metrics, report.warnings);
  for (auto& t : tracks) report.tracks.push_back(std::move(t.scores));
  return report;
}

ComparisonReport compare_values(
    const std::vector<std::pair<MetricId, std::pair<double, double>>>& values) {
  ComparisonReport report;
  for (const auto& [metric, pair] : values) {
    ComparisonRow row{metric, pair.first, pair.second, std::nullopt};
    try {
      row.rrie = rrie(pair.first, pair.second, metric.rrie_kind());
    } catch (const Error& e) {
      report.warnings.push_back(to_string(metric) + ": " + e.what());
    }
    report.rows.push_back(row);
  }
  return report;
}

ComparisonReport cmd_compare(const RunConfig& config) {
  std::vector<std::pair<MetricId, std::pair<double, double>>> values;
  if (!config.values_file.empty()) values = read_values_file(config.values_file);
  for (const auto& v : config.values) values.push_back(parse_value_spec(v));
  if (!values.empty()) return compare_values(values);

  if (config.baseline.empty() || config.candidate.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "compare needs --baseline and --candidate, or --value/--values");
  }
  Warnings warnings;
  const auto metrics = table_metrics(config);
  auto tracks = load_inputs(config, 1, metrics, warnings);
  if (tracks.size() != 1) {
    throw Error(ErrorKind::kInvalidArgument, "compare works on a single track");
  }
  const SystemScores* base = find_scores(tracks.front().scores, config.baseline);
  const SystemScores* cand = find_scores(tracks.front().scores, config.candidate);
  if (base == nullptr || cand == nullptr) {
    throw Error(ErrorKind::kLookup, "unknown system-id " +
                                        (base == nullptr ? config.baseline : config.candidate));
  }
  for (const auto& m : metrics) {
    if (!base->has(m) || !cand->has(m)) {
      warnings.push_back(to_string(m) + ": undefined for one of the systems");
      continue;
    }
    values.push_back({m, {base->at(m).aggregate, cand->at(m).aggregate}});
  }
  ComparisonReport report = compare_values(values);
  report.baseline_id = config.baseline;
  report.candidate_id = config.candidate;
  warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
  report.warnings = std::move(warnings);
  return report;
}

ReorderRun cmd_reorder(const RunConfig& config) {
  ReorderRun run;
  const auto plan = reorder_plan(config);
  std::set<MetricId> needed;
  for (const auto& p : plan) {
    needed.insert(p.from);
    needed.insert(p.to);
  }
  const std::vector<MetricId> metrics(needed.begin(), needed.end());
  auto tracks = load_inputs(config, 5, metrics, run.warnings);

  for (const auto& p : plan) {
    std::vector<std::optional<TrackReorder>> rows(tracks.size());
    std::vector<std::string> skipped(tracks.size());
    parallel_for(tracks.size(), config.jobs, [&](std::size_t i) {
      try {
        rows[i] = reorder_track(tracks[i].scores.track_id, tracks[i].scores.systems,
                                p.from, p.to, config.significance);
      } catch (const Error& e) {
        skipped[i] = e.what();
      }
    });
    std::vector<TrackReorder> kept;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (rows[i]) {
        kept.push_back(std::move(*rows[i]));
      } else {
        run.warnings.push_back(p.label + ": skipping track " + tracks[i].scores.track_id +
                               ": " + skipped[i]);
      }
    }
    run.comparisons.push_back(
        summarize_reorder(p.label, p.from, p.to, std::move(kept), config.stddev));
  }
  return run;
}

HistogramReport cmd_histogram(const RunConfig& config) {
  HistogramReport report;
  const std::vector<MetricId> metrics{MetricId::asl()};
  auto tracks = load_inputs(config, 1, metrics, report.warnings);
  if (tracks.size() != 1) {
    throw Error(ErrorKind::kInvalidArgument, "histogram works on a single track");
  }
  const LoadedTrack& track = tracks.front();
  report.track_id = track.bundle.track_id;
  report.is_delta = config.delta || !config.versus.empty();

  auto index_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < track.bundle.runs.size(); ++i)
      if (track.bundle.runs[i].system_id == id) return i;
    throw Error(ErrorKind::kLookup, "unknown system-id " + id);
  };
  report.system_a = config.system.empty()
                        ? best_system(track.scores.systems, MetricId::asl()).system_id
                        : config.system;
  const SystemEval& a = track.evals[index_of(report.system_a)];
  report.relevant_pairs = a.relevant_pairs();

  if (report.is_delta) {
    report.system_b = config.versus.empty()
                          ? median_system(track.scores.systems, MetricId::asl())
                          : config.versus;
    report.spec = HistogramSpec::signed_log10();
    if (!config.edges.empty()) report.spec.edges = config.edges;
    report.histogram =
        delta_histogram(a, track.evals[index_of(report.system_b)], report.spec);
  } else {
    report.spec = HistogramSpec::geometric();
    if (!config.edges.empty()) report.spec.edges = config.edges;
    report.histogram = asl_histogram(a, report.spec);
  }
  return report;
}

HeadroomReport cmd_headroom(const RunConfig& config) {
  HeadroomReport report;
  report.metrics = table_metrics(config);
  auto tracks = load_inputs(config, 5, report.metrics, report.warnings);
  std::vector<TrackScores> scores;
  for (auto& t : tracks) scores.push_back(std::move(t.scores));
  report.rows = headroom_table(scores, report.metrics);
  for (const auto& m : report.metrics) {
    report.distributions.emplace_back(
        m, headroom_distribution(report.rows, m, default_headroom_spec(m)));
  }
  return report;
}

OracleReport cmd_oracle(const RunConfig& config) {
  OracleReport report;
  auto check = [&](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };
  std::mt19937_64 rng(config.seed);

  {
    std::size_t failures = 0;
    for (std::size_t i = 0; i < config.trials; ++i) {
      if (!weighted_identity_check(log_uniform_vector(rng, 64, 1e6))) ++failures;
    }
    check("weighted-identity", failures == 0,
          std::to_string(config.trials - failures) + "/" + std::to_string(config.trials) +
              " random vectors, tolerance 1e-12");
  }
  {
    std::size_t failures = 0;
    for (std::size_t i = 0; i < config.trials; ++i) {
      const auto v = log_uniform_vector(rng, 64, 1e6);
      const double hm = p_space_average_sl(v);
      const double am = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      if (hm > am * (1.0 + 1e-12)) ++failures;
    }
    check("p-space-below-arithmetic", failures == 0,
          std::to_string(config.trials - failures) + "/" + std::to_string(config.trials) +
              " random vectors");
  }
  {
    std::vector<double> sl2;
    for (double x = 1.0; x <= 1e6 * (1 + 1e-9); x *= 10.0) sl2.push_back(x);
    for (double sl1 : {1.0, 5.0, 50.0}) {
      const auto lim = two_value_limit_check(sl1, sl2);
      check("two-value-limit sl1=" + describe(sl1),
            lim.monotone && lim.final_relative_gap <= 0.01,
            "equivalent SL at SL2=1e6: " + describe(lim.equivalent.back()) + ", limit " +
                describe(lim.limit));
    }
  }
  {
    const double pair[] = {1.0, 1000.0};
    const double eq = p_space_average_sl(pair);
    check("rank-1-and-1000", eq >= 1.99 && eq <= 2.01,
          "equivalent SL " + describe(eq) + " (expected within [1.99, 2.01])");
  }
  {
    const double hm = p_space_average_sl(kAppendixSearchLengths);
    check("reference-harmonic", std::fabs(hm - 2.222) <= 0.001,
          "harmonic mean " + describe(hm) + " (expected 2.222 +- 0.001)");
    const double mean =
        std::accumulate(std::begin(kAppendixTransformed), std::end(kAppendixTransformed), 0.0) /
        static_cast<double>(std::size(kAppendixTransformed));
    check("reference-transformed-list", std::fabs(mean - hm) <= 0.01 * hm,
          "transformed-list mean " + describe(mean) + " vs harmonic " + describe(hm));
  }
  {
    const double pair[] = {1.0, 1000.0};
    const auto part = effective_partition(pair);
    check("effective-top-1-1000", part.fraction == 0.5,
          "n=" + std::to_string(part.n) + " fraction " + describe(part.fraction));
  }
  if (!config.search_lengths.empty()) {
    const auto part = effective_partition(config.search_lengths);
    const auto [lo, hi] =
        std::minmax_element(config.search_lengths.begin(), config.search_lengths.end());
    check("effective-top-supplied",
          part.fraction <= 1.0 && part.achieved_sl >= *lo && part.achieved_sl <= *hi,
          "n=" + std::to_string(part.n) + "/" + std::to_string(part.total) + " fraction " +
              describe(part.fraction) + " target " + describe(part.target_sl) +
              " achieved " + describe(part.achieved_sl));
  }
  if (!config.tracks_dir.empty() || !config.qrels.empty()) {
    Warnings ignored;
    const std::vector<MetricId> metrics{MetricId::asl()};
    auto tracks = load_inputs(config, 5, metrics, ignored);
    std::vector<double> per_track;
    bool in_range = true;
    for (const auto& t : tracks) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& e : t.evals) {
        try {
          const double f = effective_top_fraction(e, config.level).fraction;
          in_range = in_range && f > 0.0 && f <= 1.0;
          sum += f;
          ++n;
        } catch (const Error&) {
        }
      }
      if (n > 0) per_track.push_back(sum / static_cast<double>(n));
    }
    const auto s = cross_track_summary(per_track, config.stddev);
    check("effective-top-tracks", in_range && s.count > 0,
          std::to_string(s.count) + " tracks, mean fraction " + describe(100.0 * s.mean) +
              "% +- " + describe(100.0 * s.stddev));
  }
  return report;
}

}  // namespace asl::cli
