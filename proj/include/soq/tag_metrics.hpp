#pragma once

#include "soq/dump.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace soq {

/// Scales tag ids into a log-compressed recency proxy.
struct TimeIndexConfig {
    double alpha = 1.0e7;
    std::int64_t min_id = 0;
    std::int64_t max_id = 0;

    std::int64_t period() const { return max_id - min_id; }
};

/// log10(tag_id / period * alpha). Throws ConfigError when the period is
/// not positive, the id lies outside [min_id, max_id], or the result is <= 0.
double time_index(std::int64_t tag_id, const TimeIndexConfig& config);

/// Derives min/max ids from the tag table. Throws DataError when empty.
TimeIndexConfig make_time_index_config(std::span<const TagRow> tags, double alpha = 1.0e7);

struct TagStats {
    std::int64_t tag_id = 0;
    std::string name;
    std::int64_t count = 0;
    std::int64_t followers = 0;
    double time_index = 0;
    double popularity = 0;    // followers / time_index
    double expert_ratio = 0;  // followers / count
    double problem_rate = 0;  // count / time_index
    double tag_quality = 0;   // followers / (time_index * count)
    /// False when count == 0: expert_ratio and tag_quality are undefined and stored as 0.
    bool ratios_defined = true;
    /// False when the tag was missing from the followers file.
    bool followers_known = true;

    bool operator==(const TagStats&) const = default;
};

using TagStatsMap = std::unordered_map<std::string, TagStats>;

struct TagStatsBuild {
    TagStatsMap stats;
    /// Follower-file names that match no tag row.
    std::vector<std::string> unmatched_followers;
    std::size_t missing_followers = 0;
};

/// Evaluates the four per-tag metrics for a single tag.
TagStats make_tag_stats(std::int64_t tag_id, std::string name, std::int64_t count, std::int64_t followers,
                        const TimeIndexConfig& config);

TagStatsBuild compute_tag_stats(std::span<const TagRow> tags,
                                const std::map<std::string, std::int64_t>& followers,
                                const TimeIndexConfig& config);

/// The six per-question tag features.
struct QuestionTagFeatures {
    int tag_count = 0;
    double max_tag_quality = 0;
    double avg_tag_quality = 0;
    double max_expert_ratio = 0;
    double min_tag_quality = 0;
    double max_problem_rate = 0;
    int unknown_tags = 0;

    bool operator==(const QuestionTagFeatures&) const = default;
};

inline constexpr std::array<std::string_view, 6> kTagFeatureNames{
    "tag_count", "max_tag_quality", "avg_tag_quality", "max_expert_ratio", "min_tag_quality", "max_problem_rate"};

std::array<double, 6> to_values(const QuestionTagFeatures& f);

/// Aggregates tag metrics over a question's 1-5 tags. Unknown tags and tags
/// with undefined ratios contribute 0. Throws DataError on 0 or >5 tags.
QuestionTagFeatures question_tag_features(std::span<const std::string> tag_names, const TagStatsMap& stats);

enum class TagMetric { popularity, expert_ratio, problem_rate, tag_quality };

std::string_view to_string(TagMetric metric);
/// Throws ConfigError for an unrecognized name.
TagMetric parse_tag_metric(std::string_view name);

double metric_value(const TagStats& s, TagMetric metric);

/// Tags with count >= min_count, descending by metric, ties by ascending name.
/// Tags whose metric is undefined are excluded.
std::vector<std::pair<std::string, double>> rank_tags(const TagStatsMap& stats, TagMetric metric,
                                                      std::int64_t min_count);

/// Writes `rank,tag,metric,value` rows (rank starts at 1).
void write_ranking(std::ostream& out, const std::vector<std::pair<std::string, double>>& ranking,
                   TagMetric metric);

/// A question reduced to what the acceptance-rate reports need.
struct TaggedLabel {
    std::vector<std::string> tags;
    bool resolved = false;
};

struct TagAcceptance {
    std::int64_t uses = 0;
    std::int64_t resolved = 0;
    double probability = 0;
};

/// Acceptance probability per tag over tags used at least `min_uses` times.
std::map<std::string, TagAcceptance> per_tag_acceptance(std::span<const TaggedLabel> questions,
                                                        std::int64_t min_uses);

/// Full-precision persistence of the tag statistics table.
void write_tag_stats(std::ostream& out, const TagStatsMap& stats);
TagStatsMap read_tag_stats(std::istream& in);

} // namespace soq
