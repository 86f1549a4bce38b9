#include "soq/asker_history.hpp"

#include <algorithm>

namespace soq {

std::optional<std::size_t> badge_index(std::string_view name) {
    for (std::size_t i = 0; i < kBadgeCount; ++i) {
        if (kBadgeDumpNames[i] == name || kBadgeKeys[i] == name) return i;
    }
    return std::nullopt;
}

std::array<double, 26> to_values(const AskerSnapshot& s) {
    std::array<double, 26> v{};
    v[0] = s.membership_duration_days;
    v[1] = static_cast<double>(s.prior_answers);
    v[2] = static_cast<double>(s.prior_questions);
    v[3] = static_cast<double>(s.prior_accepted_answers);
    v[4] = static_cast<double>(s.prior_answers_score_sum);
    v[5] = static_cast<double>(s.prior_questions_score_sum);
    for (std::size_t i = 0; i < kBadgeCount; ++i) v[6 + i] = s.badges[i] ? 1.0 : 0.0;
    return v;
}

void UserTimeline::finalize() {
    std::sort(questions.begin(), questions.end());
    std::sort(answers.begin(), answers.end());
    std::sort(badges.begin(), badges.end());

    question_score_prefix.assign(questions.size() + 1, 0);
    for (std::size_t i = 0; i < questions.size(); ++i) {
        question_score_prefix[i + 1] = question_score_prefix[i] + questions[i].score;
    }
    answer_score_prefix.assign(answers.size() + 1, 0);
    accepted_prefix.assign(answers.size() + 1, 0);
    for (std::size_t i = 0; i < answers.size(); ++i) {
        answer_score_prefix[i + 1] = answer_score_prefix[i] + answers[i].score;
        accepted_prefix[i + 1] = accepted_prefix[i] + (answers[i].was_ever_accepted ? 1 : 0);
    }
    first_award.fill(std::nullopt);
    for (const auto& b : badges) {
        if (!first_award[b.badge]) first_award[b.badge] = b.time;
    }
}

UserTimeline& TimelineBuilder::at(std::int64_t user) {
    auto [it, inserted] = timelines_.try_emplace(user);
    if (inserted) it->second.user_id = user;
    return it->second;
}

void TimelineBuilder::add_question(std::int64_t owner, Timestamp time, std::int64_t score) {
    at(owner).questions.push_back({time, score});
}

void TimelineBuilder::add_answer(std::int64_t owner, Timestamp time, std::int64_t score, bool was_ever_accepted) {
    at(owner).answers.push_back({time, score, was_ever_accepted});
}

void TimelineBuilder::add_badge(const BadgeAward& award) {
    if (award.tag_based) return;
    auto index = badge_index(award.badge_name);
    if (!index || kBadgeDumpNames[*index] != award.badge_name) return;
    at(award.user_id).badges.push_back({award.awarded_at, *index});
}

TimelineMap TimelineBuilder::finish() && {
    for (auto& [id, timeline] : timelines_) timeline.finalize();
    return std::move(timelines_);
}

std::unordered_set<std::int64_t> collect_accepted_ids(std::span<const PostRow> posts) {
    std::unordered_set<std::int64_t> ids;
    for (const auto& p : posts) {
        if (p.post_type == PostType::question && p.accepted_answer_id) ids.insert(*p.accepted_answer_id);
    }
    return ids;
}

TimelineMap build_timelines(std::span<const PostRow> posts, std::span<const BadgeAward> badges,
                            const std::unordered_set<std::int64_t>& accepted_ids) {
    TimelineBuilder builder;
    for (const auto& p : posts) {
        if (!p.owner_user_id) continue;
        if (p.post_type == PostType::question) {
            builder.add_question(*p.owner_user_id, p.creation_date, p.score);
        } else if (p.post_type == PostType::answer) {
            builder.add_answer(*p.owner_user_id, p.creation_date, p.score, accepted_ids.contains(p.id));
        }
    }
    for (const auto& b : badges) builder.add_badge(b);
    return std::move(builder).finish();
}

UserIndex index_users(std::span<const UserRow> users) {
    UserIndex index;
    index.reserve(users.size());
    for (const auto& u : users) index.insert_or_assign(u.id, u.created_at);
    return index;
}

AskerSnapshot snapshot(std::int64_t user_id, Timestamp t, const TimelineMap& timelines, const UserIndex& users) {
    AskerSnapshot s;
    auto user = users.find(user_id);
    if (user == users.end()) return s;
    s.user_known = true;
    s.membership_duration_days = std::max(0.0, days_between(user->second, t));

    auto tl = timelines.find(user_id);
    if (tl == timelines.end()) return s;
    const UserTimeline& timeline = tl->second;

    auto before = [](const auto& e, Timestamp limit) { return e.time < limit; };
    auto nq = static_cast<std::size_t>(
        std::lower_bound(timeline.questions.begin(), timeline.questions.end(), t, before) - timeline.questions.begin());
    auto na = static_cast<std::size_t>(
        std::lower_bound(timeline.answers.begin(), timeline.answers.end(), t, before) - timeline.answers.begin());
    s.prior_questions = static_cast<std::int64_t>(nq);
    s.prior_questions_score_sum = timeline.question_score_prefix[nq];
    s.prior_answers = static_cast<std::int64_t>(na);
    s.prior_answers_score_sum = timeline.answer_score_prefix[na];
    s.prior_accepted_answers = timeline.accepted_prefix[na];
    for (std::size_t b = 0; b < kBadgeCount; ++b) {
        s.badges[b] = timeline.first_award[b] && *timeline.first_award[b] < t;
    }
    return s;
}

} // namespace soq
