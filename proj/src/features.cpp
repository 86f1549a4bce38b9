#include "soq/features.hpp"

#include "soq/csv.hpp"
#include "soq/error.hpp"

#include <algorithm>
#include <cmath>

namespace soq {

namespace {

// Version 1 of the column list. Changing it requires bumping kFeatureSchemaVersion.
constexpr std::array<std::string_view, kFeatureCount> kCanonicalNames{
    "title_avg_word_chars", "title_has_wh_word", "body_avg_word_chars", "body_avg_sentence_words",
    "body_word_count", "link_count", "code_snippet_count", "title_word_count", "title_starts_capital",
    "paragraph_count", "title_is_interrogative", "title_has_error_keyword", "has_quote", "lines_of_code",
    "body_sentence_count", "code_chars", "has_list",
    "tag_count", "max_tag_quality", "avg_tag_quality", "max_expert_ratio", "min_tag_quality", "max_problem_rate",
    "asking_day_of_week", "asking_hour", "creation_date_days",
    "membership_duration_days", "prior_answers", "prior_questions", "prior_accepted_answers",
    "prior_answers_score_sum", "prior_questions_score_sum",
    "badge_scholar", "badge_tumbleweed", "badge_informed", "badge_autobiographer", "badge_student",
    "badge_supporter", "badge_editor", "badge_commentator", "badge_teacher", "badge_analytical",
    "badge_popular_question", "badge_enthusiast", "badge_custodian", "badge_good_answer",
    "badge_famous_question", "badge_curious", "badge_nice_answer", "badge_yearling", "badge_necromancer",
    "badge_notable_question"};

template <std::size_t N>
void check_group(const std::array<std::string_view, N>& group, std::size_t offset, std::string_view label) {
    for (std::size_t i = 0; i < N; ++i) {
        if (group[i] != kCanonicalNames[offset + i]) {
            throw DataError(std::string(label) + " feature '" + std::string(group[i]) + "' does not match " +
                            std::string(kFeatureSchemaVersion) + " column " + std::to_string(offset + i) + " '" +
                            std::string(kCanonicalNames[offset + i]) + "'");
        }
    }
}

bool groups_match() {
    check_group(kContentFeatureNames, 0, "content");
    check_group(kTagFeatureNames, 17, "tag");
    check_group(kMetadataFeatureNames, 23, "metadata");
    check_group(kUserFeatureNames, 26, "user");
    return true;
}

} // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() { return kCanonicalNames; }

std::vector<std::string> feature_name_list() { return {kCanonicalNames.begin(), kCanonicalNames.end()}; }

std::size_t feature_index(std::string_view name) {
    auto it = std::find(kCanonicalNames.begin(), kCanonicalNames.end(), name);
    if (it == kCanonicalNames.end()) throw ConfigError("unknown feature '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - kCanonicalNames.begin());
}

void verify_feature_names(std::span<const std::string> names, std::string_view context) {
    std::size_t n = std::min(names.size(), kCanonicalNames.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (names[i] != kCanonicalNames[i]) {
            throw DataError(std::string(context) + ": column " + std::to_string(i) + " is '" + names[i] +
                            "', expected '" + std::string(kCanonicalNames[i]) + "'");
        }
    }
    if (names.size() != kCanonicalNames.size()) {
        std::string first = names.size() > n ? names[n] : std::string(kCanonicalNames[n]);
        throw DataError(std::string(context) + ": " + std::to_string(names.size()) + " feature columns, expected " +
                        std::to_string(kCanonicalNames.size()) + " (first divergent column '" + first + "')");
    }
}

Timestamp site_launch() {
    using namespace std::chrono;
    return Timestamp{sys_days{year{2008} / July / 31}};
}

MetadataFeatures metadata_features(Timestamp asked_at) {
    MetadataFeatures m;
    m.asking_day_of_week = day_of_week(asked_at);
    m.asking_hour = hour_of_day(asked_at);
    m.creation_date_days = std::max(0.0, days_between(site_launch(), asked_at));
    return m;
}

double quantize(double value) {
    if (value == 0 || !std::isfinite(value)) return value;
    return parse_real(format_real(value), "quantize");
}

FeatureValues assemble_features(const ContentFeatures& content, const QuestionTagFeatures& tags,
                                const MetadataFeatures& meta, const AskerSnapshot& asker) {
    static const bool schema_ok = groups_match();
    (void)schema_ok;
    FeatureValues v{};
    auto c = to_values(content);
    auto t = to_values(tags);
    auto u = to_values(asker);
    std::copy(c.begin(), c.end(), v.begin());
    std::copy(t.begin(), t.end(), v.begin() + 17);
    v[23] = meta.asking_day_of_week;
    v[24] = meta.asking_hour;
    v[25] = meta.creation_date_days;
    std::copy(u.begin(), u.end(), v.begin() + 26);
    for (double& x : v) x = quantize(x);
    return v;
}

} // namespace soq
