#include "doctest.h"

#include "soq/error.hpp"
#include "soq/pipeline.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace soq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> slurp_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) files[entry.path().filename().string()] = slurp(entry.path());
    return files;
}

} // namespace

TEST_CASE("post json lines round trip") {
    PostRow p;
    p.id = 7;
    p.post_type = PostType::question;
    p.creation_date = require_timestamp("2012-03-04T05:06:07.123");
    p.score = -3;
    p.accepted_answer_id = 9;
    p.owner_user_id = 11;
    p.title = "Quote \" and \\ and \xc3\xa9";
    p.tags_raw = "<c#><c++>";
    p.body_html = "<p>x</p>\n";
    auto back = post_from_json_line(post_to_json_line(p));
    CHECK(back == p);
    CHECK(post_to_json_line(p).find('\n') == std::string::npos);
    CHECK_THROWS_AS(post_from_json_line("{nope"), DataError);
}

TEST_CASE("ingest writes a complete store") {
    test::TempDir tmp;
    auto meta = ingest(test::e2e_paths(), tmp.str("store"));
    CHECK(meta.count("store_version") == kStoreVersion);
    CHECK(meta.entries.at("dump_end") == "2020-01-31T12:00:00");
    CHECK(meta.count("followers_unmatched") == 1);
    CHECK(meta.count("followers_missing") == 1);
    for (auto name : {"posts.jsonl", "badges.csv", "users.csv", "tag_stats.csv", "ingest.meta"}) {
        CHECK(fs::exists(tmp.path() / "store" / name));
    }
    auto store = load_store(tmp.str("store"));
    CHECK(store.meta == meta);
    CHECK(store.tag_stats.size() == 10);
    CHECK(store.users.size() == 32);
    for (const auto& b : store.badges) {
        CHECK(badge_index(b.badge_name).has_value());
        CHECK_FALSE(b.tag_based);
    }

    SUBCASE("a missing input names the file") {
        auto paths = test::e2e_paths();
        paths.badges = tmp.str("nowhere.xml");
        try {
            ingest(paths, tmp.str("other"));
            FAIL("expected missing-file error");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("nowhere.xml") != std::string::npos);
        }
        paths.badges.clear();
        CHECK_THROWS_AS(ingest(paths, tmp.str("other")), ConfigError);
    }
    SUBCASE("a store from another version is rejected") {
        auto path = tmp.path() / "store" / "ingest.meta";
        auto text = slurp(path);
        auto pos = text.find("store_version=1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 15, "store_version=2");
        std::ofstream(path, std::ios::binary) << text;
        CHECK_THROWS_AS(load_store(tmp.str("store")), DataError);
    }
}

TEST_CASE("build and report outputs are deterministic") {
    test::TempDir tmp;
    auto first = test::build_e2e(tmp.str("store1"));
    auto second = test::build_e2e(tmp.str("store2"));
    CHECK(first.matrix == second.matrix);
    CHECK(slurp_dir(tmp.path() / "store1") == slurp_dir(tmp.path() / "store2"));

    write_build(first, tmp.str("out1"));
    write_build(second, tmp.str("out2"));
    auto out1 = slurp_dir(tmp.path() / "out1");
    CHECK(out1.size() == 3);
    CHECK(out1 == slurp_dir(tmp.path() / "out2"));
    CHECK(load_matrix_file(tmp.str("out1/matrix.csv")) == first.matrix);

    ReportConfig config;
    config.min_uses = 5;
    auto stats = load_tag_stats_file(tmp.str("store1/tag_stats.csv"));
    auto files = write_report("all", first.questions, &stats, config, tmp.str("rep1"));
    CHECK(files.size() == 12);
    write_report("all", first.questions, &stats, config, tmp.str("rep2"));
    CHECK(slurp_dir(tmp.path() / "rep1") == slurp_dir(tmp.path() / "rep2"));
    CHECK(write_report("all", first.questions, nullptr, config, tmp.str("rep3")).size() == 10);
    CHECK_THROWS_AS(write_report("tag_ranking", first.questions, nullptr, config, tmp.str("rep4")), ConfigError);
    CHECK_THROWS_AS(write_report("histogram", first.questions, nullptr, config, tmp.str("rep4")), ConfigError);

    auto trend = slurp(tmp.path() / "rep1" / "trend.csv");
    CHECK(trend.rfind("year,total,resolved,percentage,partial_year\n", 0) == 0);
}

TEST_CASE("labeled questions follow the matrix") {
    test::TempDir tmp;
    auto out = test::build_e2e(tmp.str("store"));
    REQUIRE(out.questions.size() == out.matrix.rows.size());
    for (std::size_t i = 0; i < out.questions.size(); ++i) {
        const auto& q = out.questions[i];
        const auto& row = out.matrix.rows[i];
        CHECK(q.id == row.question_id);
        CHECK(q.resolved == (row.label == 1));
        CHECK(static_cast<double>(q.tags.size()) == row.features[feature_index("tag_count")]);
        CHECK(static_cast<double>(q.body_word_count) == row.features[feature_index("body_word_count")]);
        for (std::size_t b = 0; b < kBadgeCount; ++b) {
            CHECK(q.badges[b] == (row.features[feature_index("badge_" + std::string(kBadgeKeys[b]))] == 1));
        }
    }

    std::stringstream csv;
    write_labeled_questions(out.questions, csv);
    auto back = read_labeled_questions(csv);
    REQUIRE(back.size() == out.questions.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].id == out.questions[i].id);
        CHECK(back[i].created_at == out.questions[i].created_at);
        CHECK(back[i].resolved == out.questions[i].resolved);
        CHECK(back[i].tags == out.questions[i].tags);
        CHECK(back[i].badges == out.questions[i].badges);
    }
}
