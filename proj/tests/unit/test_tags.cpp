#include "doctest.h"

#include "soq/error.hpp"
#include "soq/random.hpp"
#include "soq/tag_metrics.hpp"

#include <cmath>
#include <sstream>

using namespace soq;

namespace {

bool rel_close(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

TagStatsMap stats_of(std::initializer_list<TagStats> items) {
    TagStatsMap m;
    for (const auto& s : items) m[s.name] = s;
    return m;
}

} // namespace

TEST_CASE("time_index worked example") {
    TimeIndexConfig c{1e7, 1, 139961};
    // log10(133634 / 139960 * 1e7) = log10(9547970.8...) = 6.9799...
    CHECK(std::abs(time_index(133634, c) - 6.98) <= 0.005);
    CHECK(time_index(139961, c) == doctest::Approx(std::log10(139961.0 / 139960 * 1e7)));
}

TEST_CASE("time_index rejects bad configurations") {
    CHECK_THROWS_AS(time_index(5, TimeIndexConfig{1e7, 5, 5}), ConfigError);
    CHECK_THROWS_AS(time_index(10, TimeIndexConfig{1e7, 1, 5}), ConfigError);
    CHECK_THROWS_AS(time_index(1, TimeIndexConfig{1.0, 1, 1000}), ConfigError);  // log10(0.001) < 0
    CHECK_THROWS_AS(time_index(1, TimeIndexConfig{0.0, 1, 1000}), ConfigError);
}

TEST_CASE("tag metric identities hold on random inputs") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        std::int64_t min_id = static_cast<std::int64_t>(uniform_below(rng, 100)) + 1;
        std::int64_t max_id = min_id + 1 + static_cast<std::int64_t>(uniform_below(rng, 200000));
        std::int64_t id = min_id + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(max_id - min_id + 1)));
        std::int64_t count = 1 + static_cast<std::int64_t>(uniform_below(rng, 2'000'000));
        std::int64_t followers = static_cast<std::int64_t>(uniform_below(rng, 3'000'000));
        TimeIndexConfig c{1e7, min_id, max_id};
        auto s = make_tag_stats(id, "t", count, followers, c);
        double ti = std::log10(static_cast<double>(id) / static_cast<double>(max_id - min_id) * 1e7);
        CHECK(rel_close(s.time_index, ti));
        CHECK(rel_close(s.popularity, followers / ti));
        CHECK(rel_close(s.expert_ratio, static_cast<double>(followers) / count));
        CHECK(rel_close(s.problem_rate, count / ti));
        CHECK(rel_close(s.tag_quality, followers / (ti * count)));
        CHECK(rel_close(s.tag_quality, s.popularity / count));
        CHECK(rel_close(s.tag_quality, s.expert_ratio / s.time_index));
        CHECK(rel_close(s.popularity, s.expert_ratio * s.problem_rate));
    }
}

TEST_CASE("tags with zero count have undefined ratios") {
    auto s = make_tag_stats(2, "dead", 0, 40, TimeIndexConfig{1e7, 1, 10});
    CHECK_FALSE(s.ratios_defined);
    CHECK(s.expert_ratio == 0);
    CHECK(s.tag_quality == 0);
    CHECK(s.problem_rate == 0);
    CHECK(s.popularity > 0);
}

TEST_CASE("compute_tag_stats flags follower gaps") {
    std::vector<TagRow> tags{{1, "a", 10}, {2, "b", 20}, {3, "c", 30}};
    std::map<std::string, std::int64_t> followers{{"a", 100}, {"c", 5}, {"ghost", 9}};
    auto build = compute_tag_stats(tags, followers, make_time_index_config(tags));
    CHECK(build.missing_followers == 1);
    CHECK(build.unmatched_followers == std::vector<std::string>{"ghost"});
    CHECK_FALSE(build.stats.at("b").followers_known);
    CHECK(build.stats.at("b").followers == 0);
    CHECK(build.stats.at("a").followers == 100);
}

TEST_CASE("per-question tag features") {
    TimeIndexConfig c{1e7, 1, 10};
    auto stats = stats_of({make_tag_stats(2, "x", 10, 100, c), make_tag_stats(5, "y", 50, 25, c),
                           make_tag_stats(7, "z", 0, 9, c)});
    double tq_x = 100 / (std::log10(2 / 9.0 * 1e7) * 10);
    double tq_y = 25 / (std::log10(5 / 9.0 * 1e7) * 50);

    std::vector<std::string> two{"x", "y"};
    auto f = question_tag_features(two, stats);
    CHECK(f.tag_count == 2);
    CHECK(f.max_tag_quality == doctest::Approx(std::max(tq_x, tq_y)));
    CHECK(f.min_tag_quality == doctest::Approx(std::min(tq_x, tq_y)));
    CHECK(f.avg_tag_quality == doctest::Approx((tq_x + tq_y) / 2));
    CHECK(f.max_expert_ratio == doctest::Approx(10.0));
    CHECK(f.max_problem_rate == doctest::Approx(50 / std::log10(5 / 9.0 * 1e7)));
    CHECK(f.unknown_tags == 0);

    std::vector<std::string> with_unknown{"x", "nope", "z"};
    auto g = question_tag_features(with_unknown, stats);
    CHECK(g.tag_count == 3);
    CHECK(g.unknown_tags == 1);
    CHECK(g.min_tag_quality == 0);
    CHECK(g.avg_tag_quality == doctest::Approx(tq_x / 3));

    std::vector<std::string> none;
    CHECK_THROWS_AS(question_tag_features(none, stats), DataError);
    std::vector<std::string> six{"a", "b", "c", "d", "e", "f"};
    CHECK_THROWS_AS(question_tag_features(six, stats), DataError);
}

TEST_CASE("question tag feature ordering invariant") {
    std::mt19937_64 rng(5);
    TimeIndexConfig c{1e7, 1, 100};
    TagStatsMap stats;
    for (int i = 1; i <= 100; ++i) {
        auto name = "t" + std::to_string(i);
        stats[name] = make_tag_stats(i, name, static_cast<std::int64_t>(uniform_below(rng, 1000)),
                                     static_cast<std::int64_t>(uniform_below(rng, 5000)), c);
    }
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> tags;
        auto n = 1 + uniform_below(rng, 5);
        for (std::size_t k = 0; k < n; ++k) tags.push_back("t" + std::to_string(1 + uniform_below(rng, 120)));
        auto f = question_tag_features(tags, stats);
        CHECK(f.tag_count == static_cast<int>(n));
        CHECK(f.min_tag_quality <= f.avg_tag_quality + 1e-12);
        CHECK(f.avg_tag_quality <= f.max_tag_quality + 1e-12);
    }
}

TEST_CASE("tag ranking") {
    TimeIndexConfig c{1e7, 1, 10};
    auto stats = stats_of({make_tag_stats(1, "b", 10, 100, c), make_tag_stats(1, "a", 10, 100, c),
                           make_tag_stats(9, "c", 5, 1000, c), make_tag_stats(3, "d", 0, 10, c)});
    auto ranking = rank_tags(stats, TagMetric::expert_ratio, 0);
    REQUIRE(ranking.size() == 3);  // d has no defined ratio
    CHECK(ranking[0].first == "c");
    CHECK(ranking[1].first == "a");  // tie with b broken by name
    CHECK(ranking[2].first == "b");
    CHECK(rank_tags(stats, TagMetric::popularity, 6).size() == 2);

    std::ostringstream out;
    write_ranking(out, ranking, TagMetric::expert_ratio);
    CHECK(out.str() == "rank,tag,metric,value\n1,c,expert_ratio,200\n2,a,expert_ratio,10\n3,b,expert_ratio,10\n");
    CHECK(parse_tag_metric("tag_quality") == TagMetric::tag_quality);
    CHECK_THROWS_AS(parse_tag_metric("quality"), ConfigError);
}

TEST_CASE("per-tag acceptance") {
    std::vector<TaggedLabel> qs{{{"a", "b"}, true}, {{"a"}, false}, {{"b"}, true}, {{"c"}, true}};
    auto acc = per_tag_acceptance(qs, 2);
    REQUIRE(acc.size() == 2);
    CHECK(acc.at("a").uses == 2);
    CHECK(acc.at("a").probability == 0.5);
    CHECK(acc.at("b").probability == 1.0);
}

TEST_CASE("tag stats file round trip is exact") {
    TimeIndexConfig c{1e7, 1, 139961};
    auto stats = stats_of({make_tag_stats(133634, "c#", 1234567, 98765, c), make_tag_stats(7, "a,b", 0, 3, c)});
    stats["c#"].followers_known = false;
    std::stringstream buf;
    write_tag_stats(buf, stats);
    auto back = read_tag_stats(buf);
    CHECK(back == stats);
}
