#include "asl/trec_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "asl/errors.hpp"
#include "asl/parallel.hpp"

namespace asl {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool skippable(const std::vector<std::string_view>& fields) {
  return fields.empty() || fields.front().starts_with('#');
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_real(std::string_view s) {
  double value = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

}  // namespace

// --- Qrels -----------------------------------------------------------------

bool Qrels::add(const std::string& query_id, const std::string& doc_id,
                int grade) {
  auto [it, inserted] = judgments_[query_id].emplace(doc_id, grade);
  if (inserted) ++size_;
  return inserted;
}

std::optional<int> Qrels::grade(const std::string& query_id,
                                const std::string& doc_id) const {
  const DocGrades* docs = judgments_for(query_id);
  if (docs == nullptr) return std::nullopt;
  auto it = docs->find(doc_id);
  if (it == docs->end()) return std::nullopt;
  return it->second;
}

Relevance Qrels::classify(const std::string& query_id,
                          const std::string& doc_id) const {
  auto g = grade(query_id, doc_id);
  if (!g) return Relevance::kUnjudged;
  return *g >= threshold_ ? Relevance::kRelevant : Relevance::kJudgedIrrelevant;
}

const Qrels::DocGrades* Qrels::judgments_for(const std::string& query_id) const {
  auto it = judgments_.find(query_id);
  return it == judgments_.end() ? nullptr : &it->second;
}

std::vector<std::string> Qrels::relevant_docs(const std::string& query_id) const {
  std::vector<std::string> out;
  if (const DocGrades* docs = judgments_for(query_id)) {
    for (const auto& [doc, g] : *docs)
      if (g >= threshold_) out.push_back(doc);
  }
  return out;
}

std::size_t Qrels::relevant_count(const std::string& query_id) const {
  std::size_t n = 0;
  if (const DocGrades* docs = judgments_for(query_id)) {
    for (const auto& [doc, g] : *docs)
      if (g >= threshold_) ++n;
  }
  return n;
}

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> out;
  out.reserve(judgments_.size());
  for (const auto& [q, docs] : judgments_) out.push_back(q);
  return out;
}

std::vector<std::string> Qrels::evaluable_query_ids() const {
  std::vector<std::string> out;
  for (const auto& [q, docs] : judgments_) {
    if (std::any_of(docs.begin(), docs.end(),
                    [&](const auto& kv) { return kv.second >= threshold_; }))
      out.push_back(q);
  }
  return out;
}

Qrels parse_qrels(std::istream& in, int relevance_threshold,
                  const std::string& source_name) {
  Qrels qrels(relevance_threshold);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (skippable(fields)) continue;
    if (fields.size() != 4) {
      throw ParseError(ErrorKind::kParse, source_name, line_no,
                       "expected 4 columns (query iteration doc grade), got " +
                           std::to_string(fields.size()));
    }
    auto grade = parse_int(fields[3]);
    if (!grade) {
      throw ParseError(ErrorKind::kParse, source_name, line_no,
                       "grade is not an integer: '" + std::string(fields[3]) +
                           "'");
    }
    std::string query(fields[0]);
    std::string doc(fields[2]);
    if (!qrels.add(query, doc, *grade)) {
      throw ParseError(ErrorKind::kDuplicateJudgment, source_name, line_no,
                       "(" + query + ", " + doc + ") judged twice");
    }
  }
  return qrels;
}

Qrels load_qrels(const fs::path& path, int relevance_threshold) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kLayout, "cannot open qrels file " + path.string());
  }
  return parse_qrels(in, relevance_threshold, path.string());
}

// --- Runs ------------------------------------------------------------------

const std::vector<ScoredDoc>* RunList::ranking_for(
    const std::string& query_id) const {
  auto it = rankings.find(query_id);
  return it == rankings.end() ? nullptr : &it->second;
}

std::size_t RunList::prediction_count() const {
  std::size_t n = 0;
  for (const auto& [q, docs] : rankings) n += docs.size();
  return n;
}

void sort_by_score(std::vector<ScoredDoc>& docs) {
  std::sort(docs.begin(), docs.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id > b.doc_id;
  });
}

RunList parse_run(std::istream& in, const std::string& system_id,
                  const RunParseOptions& options, Warnings* warnings,
                  const std::string& source_name) {
  RunList run;
  run.system_id = system_id;
  run.policy = options.policy;
  // query -> doc -> index into run.rankings[query]
  std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>>
      seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (skippable(fields)) continue;
    if (fields.size() != 6) {
      throw ParseError(ErrorKind::kParse, source_name, line_no,
                       "expected 6 columns (query Q0 doc rank score tag), got " +
                           std::to_string(fields.size()));
    }
    auto score = parse_real(fields[4]);
    if (!score) {
      throw ParseError(ErrorKind::kParse, source_name, line_no,
                       "score is not a finite number: '" +
                           std::string(fields[4]) + "'");
    }
    std::string query(fields[0]);
    std::string doc(fields[2]);
    auto& docs = run.rankings[query];
    auto& index = seen[query];
    auto [it, inserted] = index.emplace(doc, docs.size());
    if (inserted) {
      docs.push_back({doc, *score});
      continue;
    }
    if (!options.dedupe_keep_best) {
      throw ParseError(ErrorKind::kDuplicatePrediction, source_name, line_no,
                       "(" + query + ", " + doc + ") predicted twice");
    }
    if (warnings) {
      std::ostringstream msg;
      msg << (source_name.empty() ? system_id : source_name) << ":" << line_no
          << ": duplicate (" << query << ", " << doc << ") dropped";
      warnings->push_back(msg.str());
    }
    if (*score > docs[it->second].score) {
      // The surviving copy takes the position of the better-scoring line.
      docs.erase(docs.begin() + static_cast<std::ptrdiff_t>(it->second));
      for (auto& [d, pos] : index)
        if (pos > it->second) --pos;
      it->second = docs.size();
      docs.push_back({doc, *score});
    }
  }

  if (options.policy == OrderingPolicy::kByScore) {
    for (auto& [q, docs] : run.rankings) sort_by_score(docs);
  }
  return run;
}

RunList load_run(const fs::path& path, const RunParseOptions& options,
                 Warnings* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kLayout, "cannot open run file " + path.string());
  }
  return parse_run(in, path.filename().string(), options, warnings,
                   path.string());
}

void write_run(std::ostream& out, const RunList& run) {
  const auto old_precision = out.precision(17);
  for (const auto& [query, docs] : run.rankings) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      out << query << " Q0 " << docs[i].doc_id << ' ' << (i + 1) << ' '
          << docs[i].score << ' ' << run.system_id << '\n';
    }
  }
  out.precision(old_precision);
}

// --- Tracks ----------------------------------------------------------------

const RunList* TrackBundle::find_run(const std::string& system_id) const {
  auto it = std::find_if(runs.begin(), runs.end(), [&](const RunList& r) {
    return r.system_id == system_id;
  });
  return it == runs.end() ? nullptr : &*it;
}

TrackBundle load_track(const fs::path& qrels_path, const fs::path& runs_dir,
                       const TrackOptions& options, std::string track_id) {
  if (!fs::is_regular_file(qrels_path)) {
    throw Error(ErrorKind::kLayout, "missing qrels file " + qrels_path.string());
  }
  if (!fs::is_directory(runs_dir)) {
    throw Error(ErrorKind::kLayout,
                "missing runs directory " + runs_dir.string());
  }

  TrackBundle bundle;
  bundle.track_id = std::move(track_id);
  bundle.qrels = load_qrels(qrels_path, options.relevance_threshold);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<std::optional<RunList>> parsed(files.size());
  std::vector<Warnings> file_warnings(files.size());
  parallel_for(files.size(), options.jobs, [&](std::size_t i) {
    try {
      parsed[i] = load_run(files[i], options.run_options, &file_warnings[i]);
    } catch (const Error& e) {
      file_warnings[i].push_back("skipping run " + files[i].filename().string() +
                                 ": " + e.what());
    }
  });

  for (std::size_t i = 0; i < files.size(); ++i) {
    for (auto& w : file_warnings[i]) bundle.warnings.push_back(std::move(w));
    if (parsed[i]) bundle.runs.push_back(std::move(*parsed[i]));
  }
  if (bundle.runs.size() < options.min_runs) {
    throw Error(ErrorKind::kInsufficientRuns,
                (bundle.track_id.empty() ? runs_dir.string() : bundle.track_id) +
                    " has " + std::to_string(bundle.runs.size()) +
                    " valid runs, need at least " +
                    std::to_string(options.min_runs));
  }
  return bundle;
}

TrackBundle discover_track(const fs::path& dir, const TrackOptions& options) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kLayout, "not a directory: " + dir.string());
  }
  std::string track_id = dir.filename().string();
  if (track_id.empty()) track_id = dir.parent_path().filename().string();
  return load_track(dir / "qrels.txt", dir / "runs", options, track_id);
}

std::vector<fs::path> list_track_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::kLayout, "not a directory: " + root.string());
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "qrels.txt"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace asl
