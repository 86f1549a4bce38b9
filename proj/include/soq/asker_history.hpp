#pragma once

#include "soq/dump.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace soq {

inline constexpr std::size_t kBadgeCount = 20;

/// Badge names as they appear in Badges.xml.
inline constexpr std::array<std::string_view, kBadgeCount> kBadgeDumpNames{
    "Scholar",     "Tumbleweed",       "Informed",    "Autobiographer", "Student",
    "Supporter",   "Editor",           "Commentator", "Teacher",        "Analytical",
    "Popular Question", "Enthusiast",  "Custodian",   "Good Answer",    "Famous Question",
    "Curious",     "Nice Answer",      "Yearling",    "Necromancer",    "Notable Question"};

/// snake_case keys used in feature names and JSON.
inline constexpr std::array<std::string_view, kBadgeCount> kBadgeKeys{
    "scholar",     "tumbleweed",       "informed",    "autobiographer", "student",
    "supporter",   "editor",           "commentator", "teacher",        "analytical",
    "popular_question", "enthusiast",  "custodian",   "good_answer",    "famous_question",
    "curious",     "nice_answer",      "yearling",    "necromancer",    "notable_question"};

/// Index of a badge given either its dump name or its key.
std::optional<std::size_t> badge_index(std::string_view name);

/// The asker's history as of one instant.
struct AskerSnapshot {
    double membership_duration_days = 0;
    std::int64_t prior_questions = 0;
    std::int64_t prior_answers = 0;
    std::int64_t prior_accepted_answers = 0;
    std::int64_t prior_questions_score_sum = 0;
    std::int64_t prior_answers_score_sum = 0;
    std::array<bool, kBadgeCount> badges{};
    /// False when the user id is absent from Users.xml (or the post has no owner).
    bool user_known = false;

    bool operator==(const AskerSnapshot&) const = default;
};

inline constexpr std::array<std::string_view, 26> kUserFeatureNames{
    "membership_duration_days", "prior_answers", "prior_questions", "prior_accepted_answers",
    "prior_answers_score_sum",  "prior_questions_score_sum",
    "badge_scholar",     "badge_tumbleweed",       "badge_informed",    "badge_autobiographer",
    "badge_student",     "badge_supporter",        "badge_editor",      "badge_commentator",
    "badge_teacher",     "badge_analytical",       "badge_popular_question", "badge_enthusiast",
    "badge_custodian",   "badge_good_answer",      "badge_famous_question",  "badge_curious",
    "badge_nice_answer", "badge_yearling",         "badge_necromancer", "badge_notable_question"};

std::array<double, 26> to_values(const AskerSnapshot& s);

struct QuestionEvent {
    Timestamp time;
    std::int64_t score = 0;
    auto operator<=>(const QuestionEvent&) const = default;
};

struct AnswerEvent {
    Timestamp time;
    std::int64_t score = 0;
    bool was_ever_accepted = false;
    auto operator<=>(const AnswerEvent&) const = default;
};

struct BadgeEvent {
    Timestamp time;
    std::size_t badge = 0;
    auto operator<=>(const BadgeEvent&) const = default;
};

/// One user's time-sorted activity with prefix sums for O(log n) snapshots.
struct UserTimeline {
    std::int64_t user_id = 0;
    std::vector<QuestionEvent> questions;
    std::vector<AnswerEvent> answers;
    std::vector<BadgeEvent> badges;

    // prefix[i] = sum over the first i events
    std::vector<std::int64_t> question_score_prefix;
    std::vector<std::int64_t> answer_score_prefix;
    std::vector<std::int64_t> accepted_prefix;
    std::array<std::optional<Timestamp>, kBadgeCount> first_award{};

    /// Sorts the event lists and rebuilds the prefix arrays.
    void finalize();
};

using TimelineMap = std::unordered_map<std::int64_t, UserTimeline>;
using UserIndex = std::unordered_map<std::int64_t, Timestamp>;

/// Incremental form of build_timelines for streaming callers.
class TimelineBuilder {
public:
    void add_question(std::int64_t owner, Timestamp time, std::int64_t score);
    void add_answer(std::int64_t owner, Timestamp time, std::int64_t score, bool was_ever_accepted);
    /// Ignores tag badges and badges outside the tracked set.
    void add_badge(const BadgeAward& award);

    TimelineMap finish() &&;

private:
    UserTimeline& at(std::int64_t user);
    TimelineMap timelines_;
};

/// Groups posts and badges per user. Posts without an owner are dropped;
/// answers are flagged when their id appears in `accepted_ids`.
TimelineMap build_timelines(std::span<const PostRow> posts, std::span<const BadgeAward> badges,
                            const std::unordered_set<std::int64_t>& accepted_ids);

/// Ids of every accepted answer referenced by a question.
std::unordered_set<std::int64_t> collect_accepted_ids(std::span<const PostRow> posts);

UserIndex index_users(std::span<const UserRow> users);

/// Aggregates the user's events strictly before `t`.
AskerSnapshot snapshot(std::int64_t user_id, Timestamp t, const TimelineMap& timelines, const UserIndex& users);

} // namespace soq
