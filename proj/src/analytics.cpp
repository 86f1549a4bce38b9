#include "soq/analytics.hpp"

#include "soq/csv.hpp"
#include "soq/error.hpp"

#include <algorithm>
#include <ostream>

namespace soq {

namespace {

std::string fmt(double v) { return format_real(v); }

} // namespace

double overall_acceptance(std::span<const LabeledQuestion> questions) {
    if (questions.empty()) throw DataError("overall acceptance of an empty question set");
    auto resolved = std::count_if(questions.begin(), questions.end(), [](const auto& q) { return q.resolved; });
    return static_cast<double>(resolved) / static_cast<double>(questions.size());
}

TrendReport yearly_trend(std::span<const LabeledQuestion> questions) {
    TrendReport report;
    if (questions.empty()) return report;
    std::map<int, YearBucket> buckets;
    Timestamp first = questions.front().created_at, last = first;
    for (const auto& q : questions) {
        auto& b = buckets[calendar_year(q.created_at)];
        ++b.total;
        if (q.resolved) ++b.resolved;
        first = std::min(first, q.created_at);
        last = std::max(last, q.created_at);
    }
    for (auto& [year, b] : buckets) {
        b.year = year;
        b.percentage = 100.0 * static_cast<double>(b.resolved) / static_cast<double>(b.total);
        // A bucket is complete only if the corpus spans its first and last day.
        b.partial = first >= year_start(year) + std::chrono::days{1} ||
                    last < year_start(year + 1) - std::chrono::days{1};
        report.years.push_back(b);
    }
    return report;
}

ConditionalReport badge_conditional(std::span<const LabeledQuestion> questions, std::string_view badge) {
    auto index = badge_index(badge);
    if (!index) throw ConfigError("unknown badge '" + std::string(badge) + "'");
    ConditionalReport r;
    r.condition = "badge_" + std::string(kBadgeKeys[*index]);
    for (const auto& q : questions) {
        if (!q.badges[*index]) continue;
        (q.resolved ? r.resolved : r.unresolved)++;
    }
    if (r.resolved + r.unresolved > 0) {
        r.probability = static_cast<double>(r.resolved) / static_cast<double>(r.resolved + r.unresolved);
    }
    return r;
}

std::vector<CountBucket> probability_by_tag_count(std::span<const LabeledQuestion> questions) {
    std::map<int, CountBucket> groups;
    for (const auto& q : questions) {
        auto& g = groups[static_cast<int>(q.tags.size())];
        ++g.total;
        if (q.resolved) ++g.resolved;
    }
    std::vector<CountBucket> out;
    for (auto& [count, g] : groups) {
        g.tag_count = count;
        g.probability = static_cast<double>(g.resolved) / static_cast<double>(g.total);
        out.push_back(g);
    }
    return out;
}

ConditionalReport probability_by_body_length(std::span<const LabeledQuestion> questions, int threshold_words,
                                             bool below) {
    ConditionalReport r;
    r.condition = std::string(below ? "body_word_count<" : "body_word_count>=") + std::to_string(threshold_words);
    for (const auto& q : questions) {
        bool match = q.body_word_count >= threshold_words;
        if (match == below) continue;
        (q.resolved ? r.resolved : r.unresolved)++;
    }
    if (r.resolved + r.unresolved > 0) {
        r.probability = static_cast<double>(r.resolved) / static_cast<double>(r.resolved + r.unresolved);
    }
    return r;
}

TagExtremes tag_acceptance_extremes(const std::map<std::string, TagAcceptance>& per_tag, std::size_t k) {
    std::vector<TagProbability> all;
    for (const auto& [tag, a] : per_tag) all.push_back({tag, a.uses, a.probability});
    TagExtremes out;
    out.top = all;
    std::stable_sort(out.top.begin(), out.top.end(), [](const auto& a, const auto& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.tag < b.tag;
    });
    out.bottom = all;
    std::stable_sort(out.bottom.begin(), out.bottom.end(), [](const auto& a, const auto& b) {
        if (a.probability != b.probability) return a.probability < b.probability;
        return a.tag < b.tag;
    });
    if (out.top.size() > k) out.top.resize(k);
    if (out.bottom.size() > k) out.bottom.resize(k);
    return out;
}

std::vector<TaggedLabel> tagged_labels(std::span<const LabeledQuestion> questions) {
    std::vector<TaggedLabel> out;
    out.reserve(questions.size());
    for (const auto& q : questions) out.push_back({q.tags, q.resolved});
    return out;
}

void write_trend(const TrendReport& report, std::ostream& out) {
    out << "year,total,resolved,percentage,partial_year\n";
    for (const auto& y : report.years) {
        out << y.year << ',' << y.total << ',' << y.resolved << ',' << fmt(y.percentage) << ','
            << (y.partial ? 1 : 0) << '\n';
    }
}

void write_trend_plot(const TrendReport& report, std::ostream& out) {
    out << "x,y\n";
    for (const auto& y : report.years) out << y.year << ',' << fmt(y.percentage) << '\n';
}

void write_conditionals(const std::vector<ConditionalReport>& reports, std::ostream& out) {
    out << "condition,resolved,unresolved,probability,defined\n";
    for (const auto& r : reports) {
        out << r.condition << ',' << r.resolved << ',' << r.unresolved << ','
            << (r.probability ? fmt(*r.probability) : std::string()) << ',' << (r.probability ? 1 : 0) << '\n';
    }
}

void write_conditionals_plot(const std::vector<ConditionalReport>& reports, std::ostream& out) {
    out << "x,y\n";
    for (const auto& r : reports) {
        if (r.probability) out << r.condition << ',' << fmt(*r.probability) << '\n';
    }
}

void write_tag_counts(const std::vector<CountBucket>& buckets, std::ostream& out) {
    out << "tag_count,total,resolved,probability\n";
    for (const auto& b : buckets) out << b.tag_count << ',' << b.total << ',' << b.resolved << ',' << fmt(b.probability) << '\n';
}

void write_tag_counts_plot(const std::vector<CountBucket>& buckets, std::ostream& out) {
    out << "x,y\n";
    for (const auto& b : buckets) out << b.tag_count << ',' << fmt(b.probability) << '\n';
}

void write_tag_extremes(const TagExtremes& extremes, std::ostream& out) {
    out << "list,rank,tag,uses,probability\n";
    auto rows = [&out](std::string_view list, const std::vector<TagProbability>& items) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            out << list << ',' << i + 1 << ',' << csv_escape(items[i].tag) << ',' << items[i].uses << ','
                << fmt(items[i].probability) << '\n';
        }
    };
    rows("top", extremes.top);
    rows("bottom", extremes.bottom);
}

void write_tag_extremes_plot(const TagExtremes& extremes, std::ostream& out) {
    out << "x,y\n";
    for (const auto& t : extremes.top) out << csv_escape(t.tag) << ',' << fmt(t.probability) << '\n';
    for (auto it = extremes.bottom.rbegin(); it != extremes.bottom.rend(); ++it) {
        out << csv_escape(it->tag) << ',' << fmt(it->probability) << '\n';
    }
}

} // namespace soq
