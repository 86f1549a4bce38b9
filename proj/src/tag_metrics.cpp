#include "soq/tag_metrics.hpp"

#include "soq/csv.hpp"
#include "soq/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace soq {

double time_index(std::int64_t tag_id, const TimeIndexConfig& config) {
    if (config.period() <= 0) throw ConfigError("time_index: period (max_id - min_id) must be positive");
    if (!(config.alpha > 0)) throw ConfigError("time_index: alpha must be positive");
    if (tag_id < config.min_id || tag_id > config.max_id) {
        throw ConfigError("time_index: tag id " + std::to_string(tag_id) + " outside [" +
                          std::to_string(config.min_id) + ", " + std::to_string(config.max_id) + "]");
    }
    double value = std::log10(static_cast<double>(tag_id) / static_cast<double>(config.period()) * config.alpha);
    if (!(value > 0)) {
        throw ConfigError("time_index: non-positive value for tag id " + std::to_string(tag_id) +
                          "; increase alpha");
    }
    return value;
}

TimeIndexConfig make_time_index_config(std::span<const TagRow> tags, double alpha) {
    if (tags.empty()) throw DataError("tag table is empty");
    auto [lo, hi] = std::minmax_element(tags.begin(), tags.end(),
                                        [](const TagRow& a, const TagRow& b) { return a.id < b.id; });
    return {alpha, lo->id, hi->id};
}

TagStats make_tag_stats(std::int64_t tag_id, std::string name, std::int64_t count, std::int64_t followers,
                        const TimeIndexConfig& config) {
    TagStats s;
    s.tag_id = tag_id;
    s.name = std::move(name);
    s.count = count;
    s.followers = followers;
    s.time_index = time_index(tag_id, config);
    auto f = static_cast<double>(followers);
    auto c = static_cast<double>(count);
    s.popularity = f / s.time_index;
    s.problem_rate = c / s.time_index;
    s.ratios_defined = count > 0;
    if (s.ratios_defined) {
        s.expert_ratio = f / c;
        s.tag_quality = f / (s.time_index * c);
    }
    return s;
}

TagStatsBuild compute_tag_stats(std::span<const TagRow> tags, const std::map<std::string, std::int64_t>& followers,
                                const TimeIndexConfig& config) {
    if (tags.empty()) throw DataError("tag table is empty");
    TagStatsBuild build;
    build.stats.reserve(tags.size());
    for (const auto& tag : tags) {
        auto it = followers.find(tag.name);
        std::int64_t f = it == followers.end() ? 0 : it->second;
        TagStats s = make_tag_stats(tag.id, tag.name, tag.count, f, config);
        s.followers_known = it != followers.end();
        if (!s.followers_known) ++build.missing_followers;
        build.stats.insert_or_assign(tag.name, std::move(s));
    }
    for (const auto& [name, count] : followers) {
        if (!build.stats.contains(name)) build.unmatched_followers.push_back(name);
    }
    return build;
}

std::array<double, 6> to_values(const QuestionTagFeatures& f) {
    return {static_cast<double>(f.tag_count), f.max_tag_quality, f.avg_tag_quality,
            f.max_expert_ratio, f.min_tag_quality, f.max_problem_rate};
}

QuestionTagFeatures question_tag_features(std::span<const std::string> tag_names, const TagStatsMap& stats) {
    if (tag_names.empty()) throw DataError("question has no tags");
    if (tag_names.size() > 5) {
        throw DataError("question has " + std::to_string(tag_names.size()) + " tags (at most 5 allowed)");
    }
    QuestionTagFeatures f;
    f.tag_count = static_cast<int>(tag_names.size());
    double sum = 0;
    bool first = true;
    for (const auto& name : tag_names) {
        double quality = 0, expert = 0, problem = 0;
        auto it = stats.find(name);
        if (it == stats.end()) {
            ++f.unknown_tags;
        } else {
            quality = it->second.tag_quality;
            expert = it->second.expert_ratio;
            problem = it->second.problem_rate;
        }
        sum += quality;
        if (first) {
            f.max_tag_quality = f.min_tag_quality = quality;
            f.max_expert_ratio = expert;
            f.max_problem_rate = problem;
            first = false;
        } else {
            f.max_tag_quality = std::max(f.max_tag_quality, quality);
            f.min_tag_quality = std::min(f.min_tag_quality, quality);
            f.max_expert_ratio = std::max(f.max_expert_ratio, expert);
            f.max_problem_rate = std::max(f.max_problem_rate, problem);
        }
    }
    f.avg_tag_quality = sum / f.tag_count;
    return f;
}

std::string_view to_string(TagMetric metric) {
    switch (metric) {
    case TagMetric::popularity: return "popularity";
    case TagMetric::expert_ratio: return "expert_ratio";
    case TagMetric::problem_rate: return "problem_rate";
    case TagMetric::tag_quality: return "tag_quality";
    }
    return "unknown";
}

TagMetric parse_tag_metric(std::string_view name) {
    for (auto m : {TagMetric::popularity, TagMetric::expert_ratio, TagMetric::problem_rate, TagMetric::tag_quality}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown tag metric '" + std::string(name) +
                      "' (expected popularity, expert_ratio, problem_rate or tag_quality)");
}

double metric_value(const TagStats& s, TagMetric metric) {
    switch (metric) {
    case TagMetric::popularity: return s.popularity;
    case TagMetric::expert_ratio: return s.expert_ratio;
    case TagMetric::problem_rate: return s.problem_rate;
    case TagMetric::tag_quality: return s.tag_quality;
    }
    return 0;
}

std::vector<std::pair<std::string, double>> rank_tags(const TagStatsMap& stats, TagMetric metric,
                                                      std::int64_t min_count) {
    bool needs_ratio = metric == TagMetric::expert_ratio || metric == TagMetric::tag_quality;
    std::vector<std::pair<std::string, double>> ranking;
    for (const auto& [name, s] : stats) {
        if (s.count < min_count || (needs_ratio && !s.ratios_defined)) continue;
        ranking.emplace_back(name, metric_value(s, metric));
    }
    std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranking;
}

void write_ranking(std::ostream& out, const std::vector<std::pair<std::string, double>>& ranking, TagMetric metric) {
    out << "rank,tag,metric,value\n";
    std::size_t rank = 1;
    for (const auto& [name, value] : ranking) {
        out << rank++ << ',' << csv_escape(name) << ',' << to_string(metric) << ',' << format_real(value) << '\n';
    }
}

std::map<std::string, TagAcceptance> per_tag_acceptance(std::span<const TaggedLabel> questions,
                                                        std::int64_t min_uses) {
    std::map<std::string, TagAcceptance> acc;
    for (const auto& q : questions) {
        for (const auto& tag : q.tags) {
            auto& a = acc[tag];
            ++a.uses;
            if (q.resolved) ++a.resolved;
        }
    }
    for (auto it = acc.begin(); it != acc.end();) {
        if (it->second.uses < min_uses) {
            it = acc.erase(it);
        } else {
            it->second.probability = static_cast<double>(it->second.resolved) / static_cast<double>(it->second.uses);
            ++it;
        }
    }
    return acc;
}

namespace {
constexpr std::string_view kTagStatsHeader =
    "tag_id,name,count,followers,followers_known,time_index,popularity,expert_ratio,problem_rate,tag_quality,"
    "ratios_defined";
}

void write_tag_stats(std::ostream& out, const TagStatsMap& stats) {
    std::vector<const TagStats*> rows;
    rows.reserve(stats.size());
    for (const auto& [name, s] : stats) rows.push_back(&s);
    std::sort(rows.begin(), rows.end(), [](const TagStats* a, const TagStats* b) { return a->tag_id < b->tag_id; });
    out << kTagStatsHeader << '\n';
    for (const TagStats* s : rows) {
        out << s->tag_id << ',' << csv_escape(s->name) << ',' << s->count << ',' << s->followers << ','
            << (s->followers_known ? 1 : 0) << ',' << format_exact(s->time_index) << ','
            << format_exact(s->popularity) << ',' << format_exact(s->expert_ratio) << ','
            << format_exact(s->problem_rate) << ',' << format_exact(s->tag_quality) << ','
            << (s->ratios_defined ? 1 : 0) << '\n';
    }
}

TagStatsMap read_tag_stats(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields) || join_csv(fields) != kTagStatsHeader) {
        throw DataError("tag stats file: unexpected header");
    }
    TagStatsMap stats;
    while (reader.next(fields)) {
        if (fields.size() != 11) {
            throw DataError("tag stats file: line " + std::to_string(reader.line()) + " has " +
                            std::to_string(fields.size()) + " fields, expected 11");
        }
        TagStats s;
        s.tag_id = parse_int(fields[0], "tag_id");
        s.name = fields[1];
        s.count = parse_int(fields[2], "count");
        s.followers = parse_int(fields[3], "followers");
        s.followers_known = fields[4] == "1";
        s.time_index = parse_real(fields[5], "time_index");
        s.popularity = parse_real(fields[6], "popularity");
        s.expert_ratio = parse_real(fields[7], "expert_ratio");
        s.problem_rate = parse_real(fields[8], "problem_rate");
        s.tag_quality = parse_real(fields[9], "tag_quality");
        s.ratios_defined = fields[10] == "1";
        std::string key = s.name;
        stats.insert_or_assign(std::move(key), std::move(s));
    }
    return stats;
}

} // namespace soq
