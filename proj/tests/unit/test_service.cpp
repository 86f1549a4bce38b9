#include "doctest.h"

#include "soq/error.hpp"
#include "soq/predict_service.hpp"
#include "test_support.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

using namespace soq;
using nlohmann::json;

namespace {

struct Fixture {
    test::TempDir tmp;
    Store store;
    BuildOutput build;
    GbdtEnsemble model;

    Fixture() {
        ingest(test::e2e_paths(), tmp.str("store"));
        store = load_store(tmp.str("store"));
        build = build_from_store(store, BuildConfig{});
        GbdtParams p;
        p.num_rounds = 10;
        p.gamma = 1;
        model = train(from_matrix(build.matrix), p);
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

Timestamp fixed_clock() { return require_timestamp("2016-05-05T10:30:00"); }

PredictService service() { return PredictService(fixture().model, fixture().store.tag_stats, fixed_clock); }

std::vector<std::string> error_fields(std::string_view body) {
    auto parsed = parse_draft(body);
    CHECK_FALSE(parsed.draft.has_value());
    std::vector<std::string> fields;
    for (const auto& e : parsed.errors) fields.push_back(e.field);
    return fields;
}

bool has(const std::vector<std::string>& fields, const std::string& f) {
    return std::find(fields.begin(), fields.end(), f) != fields.end();
}

} // namespace

TEST_CASE("a minimal draft parses with defaults") {
    auto parsed = parse_draft(R"({"title":"How?","body_html":"<p>x</p>","tags":[" Python "]})");
    REQUIRE(parsed.draft.has_value());
    CHECK(parsed.errors.empty());
    CHECK(parsed.draft->tags == std::vector<std::string>{"python"});
    CHECK_FALSE(parsed.draft->asked_at.has_value());
    CHECK(parsed.draft->asker == AskerSnapshot{});
}

TEST_CASE("every invalid field is reported") {
    auto fields = error_fields(
        R"({"title":"  ","body_html":3,"tags":["ok","","a b","ok",7],"asked_at":"2001-01-01T00:00:00",)"
        R"("asker":{"prior_answers":-1,"prior_questions":1.5,"prior_answers_score_sum":-4,"badge_scholar":"yes","karma":1},"extra":1})");
    for (auto f : {"title", "body_html", "tags[1]", "tags[2]", "tags[3]", "tags[4]", "asked_at", "asker.prior_answers",
                   "asker.prior_questions", "asker.badge_scholar", "asker.karma", "extra"}) {
        CHECK_MESSAGE(has(fields, f), f);
    }
    CHECK_FALSE(has(fields, "asker.prior_answers_score_sum"));
    CHECK_FALSE(has(fields, "tags[0]"));

    CHECK(has(error_fields(R"({"body_html":"","tags":["a"]})"), "title"));
    CHECK(has(error_fields(R"({"title":"t","body_html":"","tags":[]})"), "tags"));
    CHECK(has(error_fields(R"({"title":"t","body_html":"","tags":["a","b","c","d","e","f"]})"), "tags"));
    CHECK(has(error_fields(R"({"title":"t","body_html":"","tags":"a"})"), "tags"));
    CHECK(has(error_fields(R"({"title":"t","body_html":"","tags":["a"],"asked_at":"yesterday"})"), "asked_at"));
    CHECK(has(error_fields(R"({"title":"t","body_html":"","tags":["a"],"asker":[]})"), "asker"));
    CHECK(has(error_fields("{not json"), "body"));
    CHECK(has(error_fields("[1]"), "body"));
}

TEST_CASE("drafts round trip through json") {
    QuestionDraft d;
    d.title = "Title \"quoted\"";
    d.body_html = "<p>body</p>";
    d.tags = {"c#", "json"};
    d.asked_at = require_timestamp("2014-02-03T04:05:06.789");
    d.asker.membership_duration_days = 12.345678901;
    d.asker.prior_answers_score_sum = -3;
    d.asker.badges[4] = true;
    auto back = parse_draft(draft_to_json(d));
    REQUIRE(back.draft.has_value());
    CHECK(back.draft->title == d.title);
    CHECK(back.draft->tags == d.tags);
    CHECK(back.draft->asked_at == d.asked_at);
    CHECK(back.draft->asker.membership_duration_days == d.asker.membership_duration_days);
    CHECK(back.draft->asker.prior_answers_score_sum == -3);
    CHECK(back.draft->asker.badges == d.asker.badges);
}

TEST_CASE("service predictions match the batch pipeline") {
    const auto& f = fixture();
    auto svc = service();
    auto accepted = collect_accepted_ids(f.store.posts);
    auto timelines = build_timelines(f.store.posts, f.store.badges, accepted);
    auto users = index_users(f.store.users);
    std::map<std::int64_t, const PostRow*> by_id;
    for (const auto& p : f.store.posts) by_id[p.id] = &p;

    std::size_t checked = 0;
    for (std::size_t i = 0; i < f.build.matrix.rows.size() && checked < 25; i += 7, ++checked) {
        const auto& row = f.build.matrix.rows[i];
        const auto& post = *by_id.at(row.question_id);
        QuestionDraft d;
        d.title = post.title.value_or("");
        d.body_html = post.body_html;
        d.tags = split_tags(post.tags_raw.value_or(""));
        d.asked_at = post.creation_date;
        if (post.owner_user_id) d.asker = snapshot(*post.owner_user_id, post.creation_date, timelines, users);

        auto direct = svc.predict(d);
        CHECK(direct.features == row.features);
        double batch = predict(f.model, row.features);
        CHECK(std::abs(direct.probability - batch) <= 1e-9);

        auto reply = svc.handle_predict(draft_to_json(d));
        REQUIRE(reply.status == 200);
        auto j = json::parse(reply.body);
        CHECK(std::abs(j["probability"].get<double>() - batch) <= 1e-9);
        CHECK(j["model_version"] == model_version(f.model));
        CHECK(j["features"].size() == kFeatureCount);
        CHECK(nlohmann::ordered_json::parse(reply.body)["features"].begin().key() == "title_avg_word_chars");
    }
    CHECK(checked == 25);
}

TEST_CASE("predict replies") {
    auto svc = service();
    SUBCASE("malformed drafts are 400 with field names") {
        auto reply = svc.handle_predict(R"({"title":"","body_html":"","tags":["a"]})");
        CHECK(reply.status == 400);
        auto j = json::parse(reply.body);
        CHECK(j["errors"][0]["field"] == "title");
    }
    SUBCASE("the clock fills a missing time") {
        auto reply = svc.handle_predict(R"({"title":"How do I x?","body_html":"<p>x</p>","tags":["python"]})");
        REQUIRE(reply.status == 200);
        auto j = json::parse(reply.body);
        CHECK(j["features"]["asking_hour"] == 10);
        CHECK(j["features"]["asking_day_of_week"] == 3);
        auto factors = j["top_factors"];
        CHECK(factors.size() <= kTopFactorCount);
        for (std::size_t i = 1; i < factors.size(); ++i) CHECK(factors[i - 1]["importance"] >= factors[i]["importance"]);
        for (const auto& factor : factors) CHECK(factor["importance"].get<std::int64_t>() > 0);
    }
    SUBCASE("no model") {
        PredictService empty(std::nullopt, fixture().store.tag_stats, fixed_clock);
        CHECK_FALSE(empty.ready());
        CHECK(empty.handle_predict("{}").status == 503);
        CHECK(empty.handle_health().status == 503);
        CHECK_THROWS_AS(empty.predict(QuestionDraft{}), ConfigError);
    }
    SUBCASE("a model with other columns is refused") {
        auto model = fixture().model;
        std::swap(model.feature_names[0], model.feature_names[1]);
        CHECK_THROWS(PredictService(model, {}, fixed_clock));
    }
}

TEST_CASE("tag metrics and health replies") {
    auto svc = service();
    auto known = svc.handle_tag_metrics("Python");
    REQUIRE(known.status == 200);
    auto j = json::parse(known.body);
    CHECK(j["name"] == "python");
    CHECK(j["known"] == true);
    CHECK(j["count"] == 120);
    CHECK(j["followers"] == 1800);
    CHECK(j["time_index"].get<double>() == doctest::Approx(std::log10(2 / 9.0 * 1e7)));

    auto unknown = json::parse(svc.handle_tag_metrics("no-such-tag").body);
    CHECK(unknown["known"] == false);
    CHECK(svc.handle_tag_metrics(std::nullopt).status == 400);
    CHECK(svc.handle_tag_metrics("  ").status == 400);

    auto health = svc.handle_health();
    CHECK(health.status == 200);
    CHECK(json::parse(health.body)["model_version"] == svc.version());
}

TEST_CASE("http round trip") {
    auto svc = service();
    HttpServer server(svc);
    std::promise<int> bound;
    auto port_future = bound.get_future();
    std::thread worker([&] { server.listen("127.0.0.1", 0, [&](int port) { bound.set_value(port); }); });
    REQUIRE(port_future.wait_for(std::chrono::seconds(10)) == std::future_status::ready);
    int port = port_future.get();

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto ok = client.Post("/v1/predict", R"({"title":"Why?","body_html":"<p>x</p>","tags":["json"]})",
                          "application/json");
    REQUIRE(ok);
    CHECK(ok->status == 200);
    CHECK(ok->get_header_value("Content-Type") == "application/json");

    auto bad = client.Post("/v1/predict", R"({"title":"Why?"})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(bad->body.find("\"tags\"") != std::string::npos);

    auto metrics = client.Get("/v1/tags/metrics?name=c%23");
    REQUIRE(metrics);
    CHECK(json::parse(metrics->body)["name"] == "c#");

    CHECK(client.Get("/v1/nothing")->status == 404);
    server.stop();
    worker.join();
}
