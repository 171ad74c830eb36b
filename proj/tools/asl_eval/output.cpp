#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "asl/errors.hpp"
#include "asl/parallel.hpp"
#include "cli.hpp"

namespace asl::cli {

using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  // Avoid "-0.0000".
  const double scale = std::pow(10.0, decimals);
  if (std::round(v * scale) == 0.0) v = 0.0;
  os << v;
  return os.str();
}

std::string edge_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << v;
  return os.str();
}

void tsv_row(std::ostream& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out << '\t';
    out << c;
    first = false;
  }
  out << '\n';
}

ordered_json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string_view orientation_name(Orientation o) {
  return o == Orientation::kHigherBetter ? "higher" : "lower";
}

ordered_json header(std::string_view command) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

struct HistogramRow {
  std::string bucket;
  double lower;
  double upper;
  std::size_t count;
};

std::vector<HistogramRow> histogram_rows(const Histogram& h, bool with_missing) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<HistogramRow> rows;
  rows.push_back({"below", -inf, h.edges.front(), h.below});
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    rows.push_back({std::to_string(i), h.edges[i], h.edges[i + 1], h.counts[i]});
  rows.push_back({"above", h.edges.back(), inf, h.above});
  if (with_missing) rows.push_back({"missing", inf, inf, h.missing});
  return rows;
}

ordered_json histogram_json(const Histogram& h, bool with_missing) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : histogram_rows(h, with_missing)) {
    ordered_json row;
    row["bucket"] = r.bucket;
    row["lower"] = edge_text(r.lower);
    row["upper"] = edge_text(r.upper);
    row["count"] = r.count;
    rows.push_back(row);
  }
  return rows;
}

ordered_json range_json(const RangeSummary& s) {
  ordered_json j;
  j["tracks"] = s.count;
  j["mean"] = json_number(s.mean);
  j["stddev"] = json_number(s.stddev);
  j["low"] = json_number(s.low());
  j["high"] = json_number(s.high());
  return j;
}

}  // namespace

// --- Value presentation ----------------------------------------------------------

double present_value(const MetricId& metric, double value, Rounding rounding) {
  if (rounding == Rounding::kPrecise || std::isnan(value)) return value;
  if (metric.asl_family()) return std::round(value);
  return std::round(value * 1000.0) / 1000.0;
}

std::string format_value(const MetricId& metric, double value, Rounding rounding) {
  if (rounding == Rounding::kPrecise) return fixed(value, 4);
  return fixed(present_value(metric, value, rounding), metric.asl_family() ? 0 : 3);
}

std::string format_rrie(double rrie, Rounding rounding) {
  if (std::isnan(rrie)) return "NA";
  return fixed(100.0 * rrie, rounding == Rounding::kPaper ? 0 : 2) + "%";
}

// --- Reports -----------------------------------------------------------------------

void write_report(const EvalReport& report, const RunConfig& config, std::ostream& out) {
  if (config.format == OutputFormat::kTsv) {
    tsv_row(out, {"track", "system", "query", "metric", "value"});
    for (const auto& track : report.tracks) {
      for (const auto& sys : track.systems) {
        for (const auto& m : report.metrics) {
          const std::string value =
              sys.has(m) ? format_value(m, sys.at(m).aggregate, config.rounding) : "NA";
          tsv_row(out, {track.track_id, sys.system_id, "all", to_string(m), value});
        }
        if (!config.per_query) continue;
        for (const auto& m : report.metrics) {
          if (!sys.has(m)) continue;
          for (const auto& [q, v] : sys.at(m).per_query)
            tsv_row(out, {track.track_id, sys.system_id, q, to_string(m),
                          format_value(m, v, config.rounding)});
        }
      }
    }
    return;
  }

  ordered_json j = header("eval");
  j["rounding"] = config.rounding == Rounding::kPaper ? "paper" : "precise";
  j["tracks"] = ordered_json::array();
  for (const auto& track : report.tracks) {
    ordered_json t;
    t["track"] = track.track_id;
    t["systems"] = ordered_json::array();
    for (const auto& sys : track.systems) {
      ordered_json s;
      s["system"] = sys.system_id;
      s["metrics"] = ordered_json::object();
      for (const auto& m : report.metrics) {
        ordered_json mj;
        mj["orientation"] = orientation_name(m.orientation());
        if (sys.has(m)) {
          mj["value"] = json_number(present_value(m, sys.at(m).aggregate, config.rounding));
          if (config.per_query) {
            ordered_json pq = ordered_json::object();
            for (const auto& [q, v] : sys.at(m).per_query)
              pq[q] = json_number(present_value(m, v, config.rounding));
            mj["per_query"] = pq;
          }
        } else {
          mj["value"] = nullptr;
          mj["degenerate"] = true;
        }
        s["metrics"][to_string(m)] = mj;
      }
      s["degenerate_queries"] = sys.degenerate_queries;
      t["systems"].push_back(s);
    }
    j["tracks"].push_back(t);
  }
  j["warnings"] = report.warnings;
  out << j.dump(2) << '\n';
}

void write_report(const ComparisonReport& report, const RunConfig& config,
                  std::ostream& out) {
  if (config.format == OutputFormat::kTsv) {
    tsv_row(out, {"metric", "baseline", "candidate", "rrie"});
    for (const auto& r : report.rows) {
      tsv_row(out, {to_string(r.metric), format_value(r.metric, r.baseline, config.rounding),
                    format_value(r.metric, r.candidate, config.rounding),
                    r.rrie ? format_rrie(*r.rrie, config.rounding) : "NA"});
    }
    return;
  }
  ordered_json j = header("compare");
  j["baseline"] = report.baseline_id;
  j["candidate"] = report.candidate_id;
  j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json row;
    row["metric"] = to_string(r.metric);
    row["baseline"] = json_number(present_value(r.metric, r.baseline, config.rounding));
    row["candidate"] = json_number(present_value(r.metric, r.candidate, config.rounding));
    if (r.rrie) {
      row["rrie"] = config.rounding == Rounding::kPaper ? std::round(100.0 * *r.rrie) / 100.0
                                                        : *r.rrie;
    } else {
      row["rrie"] = nullptr;
    }
    j["rows"].push_back(row);
  }
  j["warnings"] = report.warnings;
  out << j.dump(2) << '\n';
}

void write_report(const ReorderRun& report, const RunConfig& config, std::ostream& out) {
  const bool paper = config.rounding == Rounding::kPaper;
  const int ds_dec = paper ? 0 : 4;
  const int kt_dec = paper ? 2 : 4;
  const int dv_dec = paper ? 3 : 4;

  if (config.format == OutputFormat::kTsv) {
    if (config.detail == "tracks") {
      tsv_row(out, {"comparison", "track", "systems", "max_delta_sort", "kendall", "delta_value"});
      for (const auto& c : report.comparisons)
        for (const auto& t : c.tracks)
          tsv_row(out, {c.label, t.track_id, std::to_string(t.delta_sort.systems.size()),
                        fixed(t.delta_sort.max_delta_sort, ds_dec), fixed(t.kendall, kt_dec),
                        fixed(t.delta_value, dv_dec)});
      return;
    }
    if (config.detail == "systems") {
      tsv_row(out, {"comparison", "track", "system", "n0", "n1", "delta_sort"});
      for (const auto& c : report.comparisons)
        for (const auto& t : c.tracks)
          for (const auto& s : t.delta_sort.systems)
            tsv_row(out, {c.label, t.track_id, s.system_id, std::to_string(s.n0),
                          std::to_string(s.n1), fixed(s.delta_sort, ds_dec)});
      return;
    }
    tsv_row(out, {"comparison", "from", "to", "tracks", "delta_sort_mean", "delta_sort_sd",
                  "delta_sort_low", "delta_sort_high", "kendall_mean", "kendall_sd",
                  "kendall_low", "kendall_high", "delta_value_mean", "delta_value_sd",
                  "delta_value_low", "delta_value_high"});
    for (const auto& c : report.comparisons) {
      tsv_row(out, {c.label, to_string(c.from), to_string(c.to), std::to_string(c.tracks.size()),
                    fixed(c.delta_sort.mean, ds_dec), fixed(c.delta_sort.stddev, ds_dec),
                    fixed(c.delta_sort.low(), ds_dec), fixed(c.delta_sort.high(), ds_dec),
                    fixed(c.kendall.mean, kt_dec), fixed(c.kendall.stddev, kt_dec),
                    fixed(c.kendall.low(), kt_dec), fixed(c.kendall.high(), kt_dec),
                    fixed(c.delta_value.mean, dv_dec), fixed(c.delta_value.stddev, dv_dec),
                    fixed(c.delta_value.low(), dv_dec), fixed(c.delta_value.high(), dv_dec)});
    }
    return;
  }

  ordered_json j = header("reorder");
  j["significance"] = {{"min_relative_gain", config.significance.min_relative_gain},
                       {"max_p_value", config.significance.max_p_value},
                       {"test", config.significance.test == TTestKind::kPaired ? "paired"
                                                                                : "two-sample"}};
  j["comparisons"] = ordered_json::array();
  for (const auto& c : report.comparisons) {
    ordered_json cj;
    cj["comparison"] = c.label;
    cj["from"] = to_string(c.from);
    cj["to"] = to_string(c.to);
    cj["delta_sort"] = range_json(c.delta_sort);
    cj["kendall"] = range_json(c.kendall);
    cj["delta_value"] = range_json(c.delta_value);
    cj["tracks"] = ordered_json::array();
    for (const auto& t : c.tracks) {
      ordered_json tj;
      tj["track"] = t.track_id;
      tj["max_delta_sort"] = t.delta_sort.max_delta_sort;
      tj["kendall"] = json_number(t.kendall);
      tj["delta_value"] = json_number(t.delta_value);
      tj["systems"] = ordered_json::array();
      for (const auto& s : t.delta_sort.systems) {
        tj["systems"].push_back(
            {{"system", s.system_id}, {"n0", s.n0}, {"n1", s.n1}, {"delta_sort", s.delta_sort}});
      }
      cj["tracks"].push_back(tj);
    }
    j["comparisons"].push_back(cj);
  }
  j["warnings"] = report.warnings;
  out << j.dump(2) << '\n';
}

void write_report(const HistogramReport& report, const RunConfig& config, std::ostream& out) {
  const bool with_missing = !report.is_delta && report.spec.overflow_missing;
  if (config.format == OutputFormat::kTsv) {
    tsv_row(out, {"bucket", "lower", "upper", "count"});
    for (const auto& r : histogram_rows(report.histogram, with_missing))
      tsv_row(out, {r.bucket, edge_text(r.lower), edge_text(r.upper), std::to_string(r.count)});
    return;
  }
  ordered_json j = header("histogram");
  j["track"] = report.track_id;
  j["kind"] = report.is_delta ? "delta" : "asl";
  j["system"] = report.system_a;
  if (report.is_delta) j["versus"] = report.system_b;
  j["relevant_pairs"] = report.relevant_pairs;
  j["buckets"] = histogram_json(report.histogram, with_missing);
  j["warnings"] = report.warnings;
  out << j.dump(2) << '\n';
}

void write_report(const HeadroomReport& report, const RunConfig& config, std::ostream& out) {
  if (config.format == OutputFormat::kTsv) {
    if (config.detail == "distribution") {
      tsv_row(out, {"metric", "bucket", "lower", "upper", "tracks"});
      for (const auto& [m, h] : report.distributions)
        for (const auto& r : histogram_rows(h, false))
          tsv_row(out, {to_string(m), r.bucket, edge_text(r.lower), edge_text(r.upper),
                        std::to_string(r.count)});
      return;
    }
    std::vector<std::string> head{"track"};
    for (const auto& m : report.metrics) {
      head.push_back(to_string(m));
      head.push_back(to_string(m) + "_system");
    }
    for (std::size_t i = 0; i < head.size(); ++i) out << (i ? "\t" : "") << head[i];
    out << '\n';
    for (const auto& row : report.rows) {
      out << row.track_id;
      for (const auto& m : report.metrics) {
        auto it = row.best.find(m);
        if (it == row.best.end()) {
          out << "\tNA\tNA";
        } else {
          out << '\t' << format_value(m, it->second.value, config.rounding) << '\t'
              << it->second.system_id;
        }
      }
      out << '\n';
    }
    return;
  }
  ordered_json j = header("headroom");
  j["tracks"] = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["track"] = row.track_id;
    for (const auto& m : report.metrics) {
      auto it = row.best.find(m);
      if (it == row.best.end()) {
        r[to_string(m)] = nullptr;
      } else {
        r[to_string(m)] = {{"value", present_value(m, it->second.value, config.rounding)},
                           {"system", it->second.system_id}};
      }
    }
    j["tracks"].push_back(r);
  }
  j["distributions"] = ordered_json::object();
  for (const auto& [m, h] : report.distributions)
    j["distributions"][to_string(m)] = histogram_json(h, false);
  j["warnings"] = report.warnings;
  out << j.dump(2) << '\n';
}

void write_report(const OracleReport& report, const RunConfig& config, std::ostream& out) {
  if (config.format == OutputFormat::kTsv) {
    tsv_row(out, {"check", "status", "detail"});
    for (const auto& c : report.checks)
      tsv_row(out, {c.name, c.passed ? "PASS" : "FAIL", c.detail});
    return;
  }
  ordered_json j = header("oracle");
  j["seed"] = config.seed;
  j["checks"] = ordered_json::array();
  for (const auto& c : report.checks)
    j["checks"].push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["all_passed"] = report.all_passed();
  out << j.dump(2) << '\n';
}

// --- Entry points ------------------------------------------------------------------

namespace {

void print_warnings(const Warnings& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::kEval: {
      auto r = cmd_eval(config);
      write_report(r, config, out);
      print_warnings(r.warnings, err);
      return kExitOk;
    }
    case Command::kCompare: {
      auto r = cmd_compare(config);
      write_report(r, config, out);
      print_warnings(r.warnings, err);
      return kExitOk;
    }
    case Command::kReorder: {
      auto r = cmd_reorder(config);
      write_report(r, config, out);
      print_warnings(r.warnings, err);
      return kExitOk;
    }
    case Command::kHistogram: {
      auto r = cmd_histogram(config);
      write_report(r, config, out);
      print_warnings(r.warnings, err);
      return kExitOk;
    }
    case Command::kHeadroom: {
      auto r = cmd_headroom(config);
      write_report(r, config, out);
      print_warnings(r.warnings, err);
      return kExitOk;
    }
    case Command::kOracle: {
      auto r = cmd_oracle(config);
      write_report(r, config, out);
      return r.all_passed() ? kExitOk : kExitPropertyFailure;
    }
  }
  return kExitInputError;
}

}  // namespace

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    if (config.output.empty()) return dispatch(config, out, err);
    std::ostringstream buffer;
    const int code = dispatch(config, buffer, err);
    std::ofstream file(config.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << config.output << '\n';
      return kExitInputError;
    }
    file << buffer.str();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

namespace {

unsigned jobs_from_env() {
  if (const char* env = std::getenv("ASL_EVAL_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return default_jobs();
}

void add_input_options(CLI::App* app, RunConfig& c) {
  app->add_option("--qrels", c.qrels, "Qrels file (with --runs-dir)");
  app->add_option("--runs-dir", c.runs_dir, "Directory of run files (with --qrels)");
  app->add_option("--tracks-dir", c.tracks_dir,
                  "A track directory (qrels.txt + runs/) or a directory of them");
  app->add_option("--threshold", c.threshold, "Minimum grade counted as relevant")
      ->capture_default_str();
  app->add_option_function<std::string>(
         "--order",
         [&c](const std::string& v) {
           c.order = v == "file" ? OrderingPolicy::kByFileOrder : OrderingPolicy::kByScore;
         },
         "Ranking order within a query: score (default) or file")
      ->check(CLI::IsMember({"score", "file"}));
  app->add_flag("--dedupe", c.dedupe, "Keep the best-scoring copy of duplicate predictions");
  app->add_option_function<std::size_t>(
      "--min-runs", [&c](std::size_t v) { c.min_runs = v; },
      "Minimum valid runs per track (default 1 for eval/compare/histogram, 5 otherwise)");
  app->add_option("--jobs", c.jobs, "Worker threads (default: $ASL_EVAL_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
}

void add_metric_options(CLI::App* app, RunConfig& c) {
  app->add_option("--metric", c.metrics,
                  "Metric (repeatable): asl, asl@g1-N, map, p@K, mrr, m1, m2, m3");
  app->add_option("--g", c.g_values, "N values for ASL@g1-N (repeatable)")
      ->check(CLI::PositiveNumber);
  app->add_option("--k", c.k_values, "K values for P@K (repeatable)")->check(CLI::PositiveNumber);
}

void add_output_options(CLI::App* app, RunConfig& c) {
  app->add_option_function<std::string>(
         "--format",
         [&c](const std::string& v) {
           c.format = v == "json" ? OutputFormat::kJson : OutputFormat::kTsv;
         },
         "Output format: tsv (default) or json")
      ->check(CLI::IsMember({"tsv", "json"}));
  app->add_option_function<std::string>(
         "--round",
         [&c](const std::string& v) {
           c.rounding = v == "paper" ? Rounding::kPaper : Rounding::kPrecise;
         },
         "precise (default) or paper: ASL to integers, rates to 3 decimals")
      ->check(CLI::IsMember({"precise", "paper"}));
  app->add_option("--output,-o", c.output, "Write the report to a file instead of stdout");
}

void add_significance_options(CLI::App* app, RunConfig& c) {
  app->add_option("--min-gain", c.significance.min_relative_gain,
                  "Relative gain needed to count as better")
      ->capture_default_str();
  app->add_option("--max-p", c.significance.max_p_value, "Largest accepted t-test p-value")
      ->capture_default_str();
  app->add_option_function<std::string>(
         "--ttest",
         [&c](const std::string& v) {
           c.significance.test = v == "two-sample" ? TTestKind::kTwoSample : TTestKind::kPaired;
         },
         "paired (default) or two-sample")
      ->check(CLI::IsMember({"paired", "two-sample"}));
  app->add_option_function<std::string>(
         "--stddev",
         [&c](const std::string& v) {
           c.stddev = v == "sample" ? StdDevKind::kSample : StdDevKind::kPopulation;
         },
         "Cross-track deviation: population (default) or sample")
      ->check(CLI::IsMember({"population", "sample"}));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  config.jobs = jobs_from_env();

  CLI::App app{"Atomized search length evaluation for TREC-style runs", "asl-eval"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Score every run of one or more tracks");
  add_input_options(eval, config);
  add_metric_options(eval, config);
  add_output_options(eval, config);
  eval->add_flag("--per-query", config.per_query, "Also print per-query values");

  auto* compare = app.add_subcommand("compare", "Baseline vs candidate with relative error reduction");
  add_input_options(compare, config);
  add_metric_options(compare, config);
  add_output_options(compare, config);
  compare->add_option("--baseline", config.baseline, "Baseline system-id");
  compare->add_option("--candidate", config.candidate, "Candidate system-id");
  compare->add_option("--value", config.values,
                      "Precomputed NAME=BASELINE,CANDIDATE (repeatable)");
  compare->add_option("--values", config.values_file,
                      "TSV file of metric, baseline, candidate rows");

  auto* reorder = app.add_subcommand("reorder", "System reordering between metrics across tracks");
  add_input_options(reorder, config);
  add_metric_options(reorder, config);
  add_output_options(reorder, config);
  add_significance_options(reorder, config);
  reorder->add_option("--preset", config.preset,
                      "Comparison set when no --metric is given: ablation, top or all")
      ->check(CLI::IsMember({"ablation", "top", "all"}))
      ->capture_default_str();
  reorder->add_option("--detail", config.detail, "summary (default), tracks or systems")
      ->check(CLI::IsMember({"summary", "tracks", "systems"}));

  auto* histogram = app.add_subcommand("histogram", "Per-document ASL or ASL-delta histogram");
  add_input_options(histogram, config);
  add_output_options(histogram, config);
  histogram->add_option("--system", config.system, "System to histogram (default: best ASL)");
  histogram->add_option("--vs", config.versus, "Second system; produces a delta histogram");
  histogram->add_flag("--delta", config.delta, "Delta histogram of best vs median system");
  histogram->add_option("--edges", config.edges, "Bucket edges, ascending")->delimiter(',');

  auto* headroom = app.add_subcommand("headroom", "Best value per metric for each track");
  add_input_options(headroom, config);
  add_metric_options(headroom, config);
  add_output_options(headroom, config);
  headroom->add_option("--detail", config.detail, "tracks (default) or distribution")
      ->check(CLI::IsMember({"tracks", "distribution"}));

  auto* oracle = app.add_subcommand("oracle", "Numerical checks on precision vs search-length averaging");
  add_input_options(oracle, config);
  add_output_options(oracle, config);
  add_significance_options(oracle, config);
  oracle->add_option("--seed", config.seed, "Seed for randomized checks")->capture_default_str();
  oracle->add_option("--trials", config.trials, "Random vectors per identity check")
      ->capture_default_str();
  oracle->add_option("--sl", config.search_lengths,
                     "Search lengths for an effective-top partition")
      ->delimiter(',');
  oracle->add_option_function<std::string>(
         "--level",
         [&config](const std::string& v) {
           config.level = v == "pooled" ? PartitionLevel::kPooled : PartitionLevel::kPerQuery;
         },
         "Effective-top level for track data: per-query (default) or pooled")
      ->check(CLI::IsMember({"per-query", "pooled"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return kExitOk;
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  if (eval->parsed()) config.command = Command::kEval;
  else if (compare->parsed()) config.command = Command::kCompare;
  else if (reorder->parsed()) config.command = Command::kReorder;
  else if (histogram->parsed()) config.command = Command::kHistogram;
  else if (headroom->parsed()) config.command = Command::kHeadroom;
  else config.command = Command::kOracle;

  return execute(config, out, err);
}

}  // namespace asl::cli
