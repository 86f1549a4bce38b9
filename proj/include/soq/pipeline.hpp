#pragma once

#include "soq/analytics.hpp"
#include "soq/dataset.hpp"
#include "soq/dump.hpp"
#include "soq/tag_metrics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace soq {

inline constexpr int kStoreVersion = 1;

// Intermediate store layout, one directory:
//   posts.jsonl     questions and answers, one JSON object per line
//   badges.csv      user_id,badge,awarded_at (tracked named badges only)
//   users.csv       user_id,created_at
//   tag_stats.csv   per-tag metrics
//   ingest.meta     key=value counters, dump_end, store_version
struct IngestPaths {
    std::string posts;
    std::string tags;
    std::string badges;
    std::string users;
    std::string followers;
};

struct IngestConfig {
    double alpha = 1.0e7;
};

/// Streams the dump files into `store_dir` (created if needed). Returns the
/// counters also written to ingest.meta.
Provenance ingest(const IngestPaths& paths, const std::string& store_dir, const IngestConfig& config = {});

struct Store {
    std::vector<PostRow> posts;
    std::vector<BadgeAward> badges;
    std::vector<UserRow> users;
    TagStatsMap tag_stats;
    Provenance meta;
};

/// Throws DataError on a missing file or a store_version mismatch.
Store load_store(const std::string& store_dir);

/// JSON line form of a PostRow used by posts.jsonl.
std::string post_to_json_line(const PostRow& post);
PostRow post_from_json_line(const std::string& line);

struct BuildOutput {
    FeatureMatrix matrix;
    std::vector<LabeledQuestion> questions;
};

/// Runs the feature join over a loaded store. The dump end defaults to the
/// one recorded at ingest, which also counts posts of other types.
BuildOutput build_from_store(const Store& store, BuildConfig config);

/// Writes matrix.csv, matrix.csv.meta and questions.csv into `out_dir`.
void write_build(const BuildOutput& output, const std::string& out_dir);

/// questions.csv: question_id,created_at,resolved,tags,body_word_count,<badge keys>
void write_labeled_questions(const std::vector<LabeledQuestion>& questions, std::ostream& out);
std::vector<LabeledQuestion> read_labeled_questions(std::istream& in);

TagStatsMap load_tag_stats_file(const std::string& path);

inline constexpr std::array<std::string_view, 7> kReportNames{"trend",        "badges",      "tagcount", "bodylen",
                                                              "tag_extremes", "tag_ranking", "all"};

struct ReportConfig {
    int body_threshold_words = 200;
    std::int64_t min_uses = 1000;
    std::size_t extremes_k = 10;
    TagMetric ranking_metric = TagMetric::tag_quality;
    std::int64_t ranking_min_count = 0;
};

/// Writes `<name>.csv` and `<name>_plot.csv` into `out_dir`. `tag_stats` is
/// only consulted by tag_ranking. Returns the files written.
std::vector<std::string> write_report(std::string_view name, const std::vector<LabeledQuestion>& questions,
                                      const TagStatsMap* tag_stats, const ReportConfig& config,
                                      const std::string& out_dir);

} // namespace soq
