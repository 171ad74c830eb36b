#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "asl/errors.hpp"
#include "asl/trec_io.hpp"

namespace asl::test_support {

// Qrels plus one run over `queries` random queries.
struct RandomInstance {
  Qrels qrels;
  RunList run;
  std::vector<std::string> query_ids;
};

inline std::string padded(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

// Lists of 0..max_len docs; relevance density, judged share and the number
// of unretrieved relevant docs vary per query. Every query has at least one
// relevant document.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t queries,
                                      std::size_t max_len) {
  RandomInstance inst;
  inst.run.system_id = "rand";
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> missing_dist(0, 3);

  for (std::size_t q = 0; q < queries; ++q) {
    const std::string qid = padded("q", q);
    inst.query_ids.push_back(qid);
    const std::size_t len = len_dist(rng);
    const double density = unit(rng);
    const double judged = unit(rng);
    std::vector<ScoredDoc> ranking;
    std::size_t relevant = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const std::string doc = padded("d", i);
      ranking.push_back({doc, static_cast<double>(len - i)});
      if (unit(rng) < density) {
        inst.qrels.add(qid, doc, 1);
        ++relevant;
      } else if (unit(rng) < judged) {
        inst.qrels.add(qid, doc, 0);
      }
    }
    int missing = missing_dist(rng);
    if (relevant == 0 && missing == 0) missing = 1;
    for (int m = 0; m < missing; ++m) inst.qrels.add(qid, padded("m", m), 1);
    inst.run.rankings[qid] = std::move(ranking);
  }
  return inst;
}

// --- Brute-force oracles on plain doc-id lists ----------------------------------

inline std::vector<std::string> ids_of(std::span<const ScoredDoc> ranking) {
  std::vector<std::string> out;
  for (const auto& d : ranking) out.push_back(d.doc_id);
  return out;
}

inline std::size_t oracle_doc_asl(const std::vector<std::string>& list,
                                  const std::set<std::string>& relevant,
                                  const std::string& doc) {
  std::size_t irrelevant = 0;
  for (const auto& d : list) {
    if (d == doc) return irrelevant + 1;
    if (!relevant.contains(d)) ++irrelevant;
  }
  return irrelevant;
}

inline double oracle_query_asl(const std::vector<std::string>& list,
                               const std::set<std::string>& relevant) {
  double sum = 0.0;
  for (const auto& r : relevant) sum += static_cast<double>(oracle_doc_asl(list, relevant, r));
  return sum / static_cast<double>(relevant.size());
}

inline double oracle_ap(const std::vector<std::string>& list,
                        const std::set<std::string>& relevant) {
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (relevant.contains(list[i])) {
      hits += 1.0;
      sum += hits / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

inline std::set<std::string> relevant_set(const Qrels& qrels, const std::string& qid) {
  auto docs = qrels.relevant_docs(qid);
  return {docs.begin(), docs.end()};
}

// --- Planted reorder tracks ---------------------------------------------------
//
// System s puts its first relevant document at rank first_rank[s] + 1, so its
// MRR position is first_rank[s]. Its ASL is set to 11 * 1.25^asl_pos[s] (up to
// rounding) by padding irrelevant documents before the other relevant ones.
// All queries are identical, so every gap of at least 10% is significant.

inline constexpr std::size_t kPlantedRelevant = 5;

inline double planted_asl_target(std::size_t position) {
  return 11.0 * std::pow(1.25, static_cast<double>(position));
}

struct PlantedTrack {
  Qrels qrels;
  std::vector<RunList> runs;
};

inline std::string system_name(std::size_t s) { return padded("s", s); }

inline PlantedTrack planted_track(std::span<const std::size_t> first_rank,
                                  std::span<const std::size_t> asl_pos,
                                  std::size_t queries = 5) {
  PlantedTrack t;
  for (std::size_t q = 0; q < queries; ++q)
    for (std::size_t r = 0; r < kPlantedRelevant; ++r)
      t.qrels.add(padded("q", q), padded("r", r), 1);

  const double rest = static_cast<double>(kPlantedRelevant - 1);
  for (std::size_t s = 0; s < first_rank.size(); ++s) {
    const std::size_t a = first_rank[s];
    const double target = planted_asl_target(asl_pos[s]);
    const auto extra = static_cast<std::size_t>(std::lround(
        (target - static_cast<double>(a) - 1.0) * static_cast<double>(kPlantedRelevant) / rest));
    std::vector<std::string> order;
    for (std::size_t i = 0; i < a; ++i) order.push_back(padded("x", i));
    order.push_back(padded("r", 0));
    for (std::size_t i = 0; i < extra; ++i) order.push_back(padded("y", i));
    for (std::size_t r = 1; r < kPlantedRelevant; ++r) order.push_back(padded("r", r));

    RunList run;
    run.system_id = system_name(s);
    for (std::size_t q = 0; q < queries; ++q) {
      auto& ranking = run.rankings[padded("q", q)];
      for (std::size_t i = 0; i < order.size(); ++i)
        ranking.push_back({order[i], static_cast<double>(order.size() - i)});
    }
    t.runs.push_back(std::move(run));
  }
  return t;
}

inline void write_track(const PlantedTrack& t, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "runs");
  std::ofstream qrels(dir / "qrels.txt");
  for (const auto& qid : t.qrels.query_ids())
    for (const auto& [doc, grade] : *t.qrels.judgments_for(qid))
      qrels << qid << " 0 " << doc << ' ' << grade << '\n';
  for (const auto& run : t.runs) {
    std::ofstream out(dir / "runs" / run.system_id);
    write_run(out, run);
  }
}

// Identity order with the system at `from` moved up to `from - jump`.
inline std::vector<std::size_t> jump_order(std::size_t systems, std::size_t from,
                                           std::size_t jump) {
  std::vector<std::size_t> pos(systems);
  for (std::size_t s = 0; s < systems; ++s) pos[s] = s;
  for (std::size_t s = from - jump; s < from; ++s) pos[s] = s + 1;
  pos[from] = from - jump;
  return pos;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("asl_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// The two-query worked example: q1 has ASLs 1, 3, 3 (d9 unretrieved) and q2 a
// single relevant document at rank 2.
inline constexpr const char* kFixtureQrels =
    "q1 0 d1 1\nq1 0 d4 1\nq1 0 d9 1\nq1 0 d2 0\nq2 0 e2 1\n";
inline constexpr const char* kFixtureRun =
    "q1 Q0 d1 1 5 sys\nq1 Q0 d2 2 4 sys\nq1 Q0 d3 3 3 sys\nq1 Q0 d4 4 2 sys\n"
    "q1 Q0 d5 5 1 sys\nq2 Q0 e1 1 2 sys\nq2 Q0 e2 2 1 sys\n";

inline void write_fixture_track(const std::filesystem::path& dir) {
  write_file(dir / "qrels.txt", kFixtureQrels);
  write_file(dir / "runs" / "sys", kFixtureRun);
}

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace asl::test_support
