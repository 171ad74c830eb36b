#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace asl {

using Warnings = std::vector<std::string>;

enum class Relevance { kRelevant, kJudgedIrrelevant, kUnjudged };

/// Relevance judgments for one track, keyed by query then document.
///
/// Grades are kept verbatim; relevance is binarized on demand against
/// `threshold()` so the same judgments can be re-read at another cut.
class Qrels {
 public:
  using DocGrades = std::map<std::string, int>;

  explicit Qrels(int relevance_threshold = 1)
      : threshold_(relevance_threshold) {}

  // Returns false if (query, doc) was already judged.
  bool add(const std::string& query_id, const std::string& doc_id, int grade);

  int threshold() const noexcept { return threshold_; }
  std::optional<int> grade(const std::string& query_id,
                           const std::string& doc_id) const;
  Relevance classify(const std::string& query_id,
                     const std::string& doc_id) const;
  bool is_relevant(const std::string& query_id,
                   const std::string& doc_id) const {
    return classify(query_id, doc_id) == Relevance::kRelevant;
  }

  bool has_query(const std::string& query_id) const {
    return judgments_.contains(query_id);
  }
  // Nullptr when the query has no judgments.
  const DocGrades* judgments_for(const std::string& query_id) const;
  // Relevant doc-ids for a query in lexicographic order.
  std::vector<std::string> relevant_docs(const std::string& query_id) const;
  std::size_t relevant_count(const std::string& query_id) const;

  // Every judged query-id, sorted.
  std::vector<std::string> query_ids() const;
  // Query-ids with at least one relevant document, sorted.
  std::vector<std::string> evaluable_query_ids() const;

  std::size_t size() const noexcept { return size_; }

 private:
  int threshold_;
  std::size_t size_ = 0;
  std::map<std::string, DocGrades> judgments_;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

enum class OrderingPolicy { kByScore, kByFileOrder };

/// One system's ranked output. Per-query sequences are final: index 0 is rank 1.
struct RunList {
  std::string system_id;
  std::map<std::string, std::vector<ScoredDoc>> rankings;
  OrderingPolicy policy = OrderingPolicy::kByScore;

  const std::vector<ScoredDoc>* ranking_for(const std::string& query_id) const;
  std::size_t prediction_count() const;

  friend bool operator==(const RunList&, const RunList&) = default;
};

struct RunParseOptions {
  OrderingPolicy policy = OrderingPolicy::kByScore;
  // Keep the highest-scoring copy of a repeated (query, doc) and warn
  // instead of failing.
  bool dedupe_keep_best = false;
};

// `source_name` only labels diagnostics.
Qrels parse_qrels(std::istream& in, int relevance_threshold = 1,
                  const std::string& source_name = {});
Qrels load_qrels(const std::filesystem::path& path,
                 int relevance_threshold = 1);

RunList parse_run(std::istream& in, const std::string& system_id,
                  const RunParseOptions& options = {},
                  Warnings* warnings = nullptr,
                  const std::string& source_name = {});
RunList load_run(const std::filesystem::path& path,
                 const RunParseOptions& options = {},
                 Warnings* warnings = nullptr);

// Writes six-column run lines; the rank column is rewritten as 1..k and the
// tag column carries the system-id.
void write_run(std::ostream& out, const RunList& run);

// Orders a per-query sequence by score descending, doc-id descending.
void sort_by_score(std::vector<ScoredDoc>& docs);

struct TrackBundle {
  std::string track_id;
  Qrels qrels;
  std::vector<RunList> runs;  // sorted by system-id
  Warnings warnings;

  const RunList* find_run(const std::string& system_id) const;
};

struct TrackOptions {
  int relevance_threshold = 1;
  RunParseOptions run_options;
  std::size_t min_runs = 5;
  unsigned jobs = 1;
};

/// Loads `<dir>/qrels.txt` plus every regular file under `<dir>/runs/`.
///
/// Runs that fail to parse are skipped with a warning; the remaining count
/// must reach `min_runs`. The system-id of a run is its file name.
TrackBundle discover_track(const std::filesystem::path& dir,
                           const TrackOptions& options = {});

// Builds a bundle from an explicit qrels file and runs directory.
TrackBundle load_track(const std::filesystem::path& qrels_path,
                       const std::filesystem::path& runs_dir,
                       const TrackOptions& options = {},
                       std::string track_id = {});

// Every subdirectory of `root` that holds a qrels.txt, in name order.
std::vector<std::filesystem::path> list_track_dirs(
    const std::filesystem::path& root);

}  // namespace asl
