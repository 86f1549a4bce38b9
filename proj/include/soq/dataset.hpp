#pragma once

#include "soq/asker_history.hpp"
#include "soq/dump.hpp"
#include "soq/features.hpp"
#include "soq/tag_metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace soq {

struct FeatureVector {
    std::int64_t question_id = 0;
    FeatureValues features{};
    int label = 0;

    bool operator==(const FeatureVector&) const = default;
};

/// Where a matrix came from. Keys are kept sorted so the sidecar file is deterministic.
struct Provenance {
    std::map<std::string, std::string> entries;

    void set(const std::string& key, std::string value) { entries[key] = std::move(value); }
    void add(const std::string& key, std::int64_t delta = 1);
    std::int64_t count(const std::string& key) const;

    bool operator==(const Provenance&) const = default;
};

struct FeatureMatrix {
    std::vector<std::string> names = feature_name_list();
    std::vector<FeatureVector> rows;
    Provenance provenance;

    bool operator==(const FeatureMatrix&) const = default;
};

/// 1 iff the question has an accepted answer. Throws DataError for non-questions.
int label(const PostRow& post);

/// Latest creation date over all posts. Throws DataError when empty.
Timestamp dump_end_of(std::span<const PostRow> posts);

/// True when the question is old enough to have had a chance at an accepted answer.
bool outside_cutoff(Timestamp created, Timestamp dump_end, int cutoff_days);

struct CutoffResult {
    std::vector<PostRow> kept;
    std::size_t removed = 0;
};

CutoffResult filter_recent(std::span<const PostRow> questions, Timestamp dump_end, int cutoff_days = 15);

struct BuildConfig {
    int cutoff_days = 15;
    std::optional<Timestamp> dump_end;
    unsigned threads = 1;
};

/// Computes one question's feature row from the shared read-only lookups.
class RowAssembler {
public:
    RowAssembler(const TagStatsMap& tag_stats, const TimelineMap& timelines, const UserIndex& users)
        : tag_stats_(tag_stats), timelines_(timelines), users_(users) {}

    struct Outcome {
        std::optional<FeatureVector> row;
        /// Provenance key of the skip reason when `row` is empty.
        std::string skip_reason;
        bool unknown_asker = false;
        int unknown_tags = 0;
    };

    Outcome assemble(const PostRow& question) const;

private:
    const TagStatsMap& tag_stats_;
    const TimelineMap& timelines_;
    const UserIndex& users_;
};

/// One labeled row per retained question, in post order.
FeatureMatrix build_matrix(std::span<const PostRow> posts, const TagStatsMap& tag_stats,
                           const TimelineMap& timelines, const UserIndex& users, const BuildConfig& config);

/// Header `question_id,<52 names>,resolved`; values with nine significant digits.
void export_matrix(const FeatureMatrix& matrix, std::ostream& out);
/// Throws DataError on header mismatch (naming the first divergent column),
/// wrong field counts, or a truncated final line.
FeatureMatrix import_matrix(std::istream& in);

void write_provenance(const Provenance& provenance, std::ostream& out);
Provenance read_provenance(std::istream& in);

/// File helpers: the provenance lives next to the matrix as `<path>.meta`.
/// Loading checks the row count recorded there.
void save_matrix_file(const FeatureMatrix& matrix, const std::string& path);
FeatureMatrix load_matrix_file(const std::string& path);

} // namespace soq
