#pragma once

#include "soq/asker_history.hpp"
#include "soq/tag_metrics.hpp"
#include "soq/timestamp.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace soq {

/// A labeled question with the attributes the descriptive reports group by.
struct LabeledQuestion {
    std::int64_t id = 0;
    Timestamp created_at{};
    bool resolved = false;
    std::vector<std::string> tags;
    int body_word_count = 0;
    std::array<bool, kBadgeCount> badges{};
};

/// Resolved share over all questions. Throws DataError when empty.
double overall_acceptance(std::span<const LabeledQuestion> questions);

struct YearBucket {
    int year = 0;
    std::int64_t total = 0;
    std::int64_t resolved = 0;
    double percentage = 0;
    /// The corpus does not cover the whole calendar year.
    bool partial = false;
};

struct TrendReport {
    std::vector<YearBucket> years;
};

/// Buckets by UTC calendar year of creation.
TrendReport yearly_trend(std::span<const LabeledQuestion> questions);

struct ConditionalReport {
    std::string condition;
    std::int64_t resolved = 0;
    std::int64_t unresolved = 0;
    /// Empty when no question satisfies the condition.
    std::optional<double> probability;
};

/// P(resolved | asker held `badge` when asking). `badge` is a dump name or
/// key; throws ConfigError outside the tracked 20.
ConditionalReport badge_conditional(std::span<const LabeledQuestion> questions, std::string_view badge);

struct CountBucket {
    int tag_count = 0;
    std::int64_t total = 0;
    std::int64_t resolved = 0;
    double probability = 0;
};

std::vector<CountBucket> probability_by_tag_count(std::span<const LabeledQuestion> questions);

/// Condition body_word_count >= threshold. `below` selects the complement.
ConditionalReport probability_by_body_length(std::span<const LabeledQuestion> questions, int threshold_words = 200,
                                             bool below = false);

struct TagProbability {
    std::string tag;
    std::int64_t uses = 0;
    double probability = 0;
};

struct TagExtremes {
    std::vector<TagProbability> top;     // descending probability
    std::vector<TagProbability> bottom;  // ascending probability
};

/// Ties are broken by ascending tag name in both lists.
TagExtremes tag_acceptance_extremes(const std::map<std::string, TagAcceptance>& per_tag, std::size_t k);

std::vector<TaggedLabel> tagged_labels(std::span<const LabeledQuestion> questions);

// CSV writers. Each table has a fixed header; `*_plot` variants emit x,y pairs.
void write_trend(const TrendReport& report, std::ostream& out);
void write_trend_plot(const TrendReport& report, std::ostream& out);
void write_conditionals(const std::vector<ConditionalReport>& reports, std::ostream& out);
void write_conditionals_plot(const std::vector<ConditionalReport>& reports, std::ostream& out);
void write_tag_counts(const std::vector<CountBucket>& buckets, std::ostream& out);
void write_tag_counts_plot(const std::vector<CountBucket>& buckets, std::ostream& out);
void write_tag_extremes(const TagExtremes& extremes, std::ostream& out);
void write_tag_extremes_plot(const TagExtremes& extremes, std::ostream& out);

} // namespace soq
