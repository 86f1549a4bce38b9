#include "soq/pipeline.hpp"

#include "soq/csv.hpp"
#include "soq/error.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace soq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path, std::string_view what) {
    if (path.empty()) throw ConfigError(std::string(what) + " path not given");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + std::string(what) + " file '" + path + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw DataError("error writing '" + path.string() + "'");
}

std::vector<std::string> read_header(CsvReader& reader, std::string_view file, std::string_view expected) {
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError(std::string(file) + " is empty");
    if (join_csv(fields) != expected) {
        throw DataError(std::string(file) + ": unexpected header '" + join_csv(fields) + "', expected '" +
                        std::string(expected) + "'");
    }
    return fields;
}

void check_fields(const std::vector<std::string>& fields, std::size_t n, std::string_view file, std::size_t line) {
    if (fields.size() != n) {
        throw DataError(std::string(file) + " line " + std::to_string(line) + ": expected " + std::to_string(n) +
                        " fields, found " + std::to_string(fields.size()));
    }
}

} // namespace

std::string post_to_json_line(const PostRow& post) {
    json j;
    j["id"] = post.id;
    j["type"] = static_cast<int>(post.post_type);
    j["created"] = format_timestamp(post.creation_date);
    j["score"] = post.score;
    if (post.accepted_answer_id) j["accepted"] = *post.accepted_answer_id;
    if (post.parent_id) j["parent"] = *post.parent_id;
    if (post.owner_user_id) j["owner"] = *post.owner_user_id;
    if (post.title) j["title"] = *post.title;
    if (post.tags_raw) j["tags"] = *post.tags_raw;
    if (post.post_type == PostType::question) j["body"] = post.body_html;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

PostRow post_from_json_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("posts.jsonl: malformed line");
    try {
        PostRow p;
        p.id = j.at("id").get<std::int64_t>();
        int type = j.at("type").get<int>();
        p.post_type = type == 1 ? PostType::question : type == 2 ? PostType::answer : PostType::other;
        p.creation_date = require_timestamp(j.at("created").get<std::string>());
        p.score = j.at("score").get<std::int64_t>();
        if (j.contains("accepted")) p.accepted_answer_id = j["accepted"].get<std::int64_t>();
        if (j.contains("parent")) p.parent_id = j["parent"].get<std::int64_t>();
        if (j.contains("owner")) p.owner_user_id = j["owner"].get<std::int64_t>();
        if (j.contains("title")) p.title = j["title"].get<std::string>();
        if (j.contains("tags")) p.tags_raw = j["tags"].get<std::string>();
        if (j.contains("body")) p.body_html = j["body"].get<std::string>();
        return p;
    } catch (const json::exception& e) {
        throw DataError(std::string("posts.jsonl: ") + e.what());
    }
}

Provenance ingest(const IngestPaths& paths, const std::string& store_dir, const IngestConfig& config) {
    auto posts_in = open_input(paths.posts, "posts");
    auto tags_in = open_input(paths.tags, "tags");
    auto badges_in = open_input(paths.badges, "badges");
    auto users_in = open_input(paths.users, "users");
    auto followers_in = open_input(paths.followers, "followers");

    fs::path dir(store_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create store directory '" + store_dir + "': " + ec.message());

    Provenance meta;
    meta.set("store_version", std::to_string(kStoreVersion));
    meta.set("schema_version", std::string(kFeatureSchemaVersion));

    {
        auto path = dir / "posts.jsonl";
        auto out = open_output(path);
        std::int64_t questions = 0, answers = 0, other = 0;
        std::optional<Timestamp> dump_end;
        std::vector<std::string> errors;
        auto skipped = for_each_record<PostRow>(posts_in, decode_post, [&](PostRow p) {
            dump_end = dump_end ? std::max(*dump_end, p.creation_date) : p.creation_date;
            if (p.post_type == PostType::other) {
                ++other;
                return;
            }
            (p.post_type == PostType::question ? questions : answers)++;
            out << post_to_json_line(p) << '\n';
        }, &errors);
        close_output(out, path);
        meta.set("posts_questions", std::to_string(questions));
        meta.set("posts_answers", std::to_string(answers));
        meta.set("posts_other", std::to_string(other));
        meta.set("posts_skipped", std::to_string(skipped));
        meta.set("dump_end", dump_end ? format_timestamp(*dump_end) : "none");
    }

    {
        auto parsed = parse_tags(tags_in);
        auto followers = load_followers(followers_in);
        meta.set("tags", std::to_string(parsed.rows.size()));
        meta.set("tags_skipped", std::to_string(parsed.skipped));
        meta.set("followers_skipped", std::to_string(followers.skipped));
        meta.set("followers_duplicates", std::to_string(followers.duplicates));
        TagStatsMap stats;
        if (!parsed.rows.empty()) {
            auto time_config = make_time_index_config(parsed.rows, config.alpha);
            auto built = compute_tag_stats(parsed.rows, followers.followers, time_config);
            meta.set("followers_unmatched", std::to_string(built.unmatched_followers.size()));
            meta.set("followers_missing", std::to_string(built.missing_followers));
            meta.set("time_index_min_id", std::to_string(time_config.min_id));
            meta.set("time_index_max_id", std::to_string(time_config.max_id));
            stats = std::move(built.stats);
        }
        meta.set("alpha", format_exact(config.alpha));
        auto path = dir / "tag_stats.csv";
        auto out = open_output(path);
        write_tag_stats(out, stats);
        close_output(out, path);
    }

    {
        auto path = dir / "badges.csv";
        auto out = open_output(path);
        out << "user_id,badge,awarded_at\n";
        std::int64_t kept = 0, ignored = 0;
        auto skipped = for_each_record<BadgeAward>(badges_in, decode_badge, [&](BadgeAward b) {
            auto index = badge_index(b.badge_name);
            if (b.tag_based || !index || kBadgeDumpNames[*index] != b.badge_name) {
                ++ignored;
                return;
            }
            ++kept;
            out << b.user_id << ',' << kBadgeKeys[*index] << ',' << format_timestamp(b.awarded_at) << '\n';
        });
        close_output(out, path);
        meta.set("badges_kept", std::to_string(kept));
        meta.set("badges_ignored", std::to_string(ignored));
        meta.set("badges_skipped", std::to_string(skipped));
    }

    {
        auto path = dir / "users.csv";
        auto out = open_output(path);
        out << "user_id,created_at\n";
        std::int64_t count = 0;
        auto skipped = for_each_record<UserRow>(users_in, decode_user, [&](UserRow u) {
            ++count;
            out << u.id << ',' << format_timestamp(u.created_at) << '\n';
        });
        close_output(out, path);
        meta.set("users", std::to_string(count));
        meta.set("users_skipped", std::to_string(skipped));
    }

    auto path = dir / "ingest.meta";
    auto out = open_output(path);
    write_provenance(meta, out);
    close_output(out, path);
    return meta;
}

TagStatsMap load_tag_stats_file(const std::string& path) {
    auto in = open_input(path, "tag stats");
    return read_tag_stats(in);
}

Store load_store(const std::string& store_dir) {
    fs::path dir(store_dir);
    Store store;
    {
        auto in = open_input((dir / "ingest.meta").string(), "store metadata");
        store.meta = read_provenance(in);
        auto version = store.meta.entries.find("store_version");
        if (version == store.meta.entries.end() || version->second != std::to_string(kStoreVersion)) {
            throw DataError("store '" + store_dir + "' has version " +
                            (version == store.meta.entries.end() ? std::string("<none>") : version->second) +
                            ", expected " + std::to_string(kStoreVersion));
        }
        auto schema = store.meta.entries.find("schema_version");
        if (schema == store.meta.entries.end() || schema->second != kFeatureSchemaVersion) {
            throw DataError("store '" + store_dir + "' was written for a different feature schema");
        }
    }
    {
        auto in = open_input((dir / "posts.jsonl").string(), "posts store");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                store.posts.push_back(post_from_json_line(line));
            } catch (const DataError& e) {
                throw DataError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
            }
        }
    }
    {
        auto in = open_input((dir / "badges.csv").string(), "badges store");
        CsvReader reader(in);
        read_header(reader, "badges.csv", "user_id,badge,awarded_at");
        std::vector<std::string> f;
        while (reader.next(f)) {
            check_fields(f, 3, "badges.csv", reader.line());
            auto index = badge_index(f[1]);
            if (!index) throw DataError("badges.csv line " + std::to_string(reader.line()) + ": unknown badge " + f[1]);
            store.badges.push_back(BadgeAward{parse_int(f[0], "user_id"), std::string(kBadgeDumpNames[*index]),
                                              require_timestamp(f[2]), false});
        }
    }
    {
        auto in = open_input((dir / "users.csv").string(), "users store");
        CsvReader reader(in);
        read_header(reader, "users.csv", "user_id,created_at");
        std::vector<std::string> f;
        while (reader.next(f)) {
            check_fields(f, 2, "users.csv", reader.line());
            store.users.push_back(UserRow{parse_int(f[0], "user_id"), require_timestamp(f[1])});
        }
    }
    store.tag_stats = load_tag_stats_file((dir / "tag_stats.csv").string());
    return store;
}

BuildOutput build_from_store(const Store& store, BuildConfig config) {
    if (!config.dump_end) {
        auto it = store.meta.entries.find("dump_end");
        if (it != store.meta.entries.end() && it->second != "none") {
            config.dump_end = require_timestamp(it->second);
        }
    }
    auto accepted = collect_accepted_ids(store.posts);
    auto timelines = build_timelines(store.posts, store.badges, accepted);
    auto users = index_users(store.users);

    BuildOutput output;
    output.matrix = build_matrix(store.posts, store.tag_stats, timelines, users, config);
    output.matrix.provenance.set("store_dump_end", store.meta.entries.count("dump_end")
                                                       ? store.meta.entries.at("dump_end")
                                                       : std::string("none"));

    std::unordered_map<std::int64_t, const PostRow*> by_id;
    for (const auto& p : store.posts) {
        if (p.post_type == PostType::question) by_id.emplace(p.id, &p);
    }
    const auto words = feature_index("body_word_count");
    const auto first_badge = feature_index("badge_scholar");
    output.questions.reserve(output.matrix.rows.size());
    for (const auto& row : output.matrix.rows) {
        const PostRow& post = *by_id.at(row.question_id);
        LabeledQuestion q;
        q.id = row.question_id;
        q.created_at = post.creation_date;
        q.resolved = row.label == 1;
        q.tags = split_tags(post.tags_raw.value_or(""));
        q.body_word_count = static_cast<int>(row.features[words]);
        for (std::size_t b = 0; b < kBadgeCount; ++b) q.badges[b] = row.features[first_badge + b] != 0;
        output.questions.push_back(std::move(q));
    }
    return output;
}

void write_build(const BuildOutput& output, const std::string& out_dir) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + out_dir + "': " + ec.message());
    save_matrix_file(output.matrix, (dir / "matrix.csv").string());
    auto path = dir / "questions.csv";
    auto out = open_output(path);
    write_labeled_questions(output.questions, out);
    close_output(out, path);
}

namespace {

std::string labeled_header() {
    std::string header = "question_id,created_at,resolved,tags,body_word_count";
    for (auto key : kBadgeKeys) header += ",badge_" + std::string(key);
    return header;
}

} // namespace

void write_labeled_questions(const std::vector<LabeledQuestion>& questions, std::ostream& out) {
    out << labeled_header() << '\n';
    for (const auto& q : questions) {
        out << q.id << ',' << format_timestamp(q.created_at) << ',' << (q.resolved ? 1 : 0) << ','
            << csv_escape(join_tags(q.tags)) << ',' << q.body_word_count;
        for (bool b : q.badges) out << ',' << (b ? 1 : 0);
        out << '\n';
    }
}

std::vector<LabeledQuestion> read_labeled_questions(std::istream& in) {
    CsvReader reader(in);
    read_header(reader, "questions.csv", labeled_header());
    std::vector<LabeledQuestion> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        check_fields(f, 5 + kBadgeCount, "questions.csv", reader.line());
        LabeledQuestion q;
        q.id = parse_int(f[0], "question_id");
        q.created_at = require_timestamp(f[1]);
        q.resolved = parse_int(f[2], "resolved") != 0;
        q.tags = split_tags(f[3]);
        q.body_word_count = static_cast<int>(parse_int(f[4], "body_word_count"));
        for (std::size_t b = 0; b < kBadgeCount; ++b) q.badges[b] = parse_int(f[5 + b], "badge") != 0;
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<std::string> write_report(std::string_view name, const std::vector<LabeledQuestion>& questions,
                                      const TagStatsMap* tag_stats, const ReportConfig& config,
                                      const std::string& out_dir) {
    if (name == "all") {
        std::vector<std::string> files;
        for (auto each : kReportNames) {
            if (each == "all" || (each == "tag_ranking" && !tag_stats)) continue;
            auto written = write_report(each, questions, tag_stats, config, out_dir);
            files.insert(files.end(), written.begin(), written.end());
        }
        return files;
    }
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create report directory '" + out_dir + "': " + ec.message());
    auto table_path = dir / (std::string(name) + ".csv");
    auto plot_path = dir / (std::string(name) + "_plot.csv");

    std::ostringstream table, plot;
    if (name == "trend") {
        auto report = yearly_trend(questions);
        write_trend(report, table);
        write_trend_plot(report, plot);
    } else if (name == "badges") {
        std::vector<ConditionalReport> reports;
        for (auto key : kBadgeKeys) reports.push_back(badge_conditional(questions, key));
        write_conditionals(reports, table);
        write_conditionals_plot(reports, plot);
    } else if (name == "tagcount") {
        auto buckets = probability_by_tag_count(questions);
        write_tag_counts(buckets, table);
        write_tag_counts_plot(buckets, plot);
    } else if (name == "bodylen") {
        std::vector<ConditionalReport> reports{
            probability_by_body_length(questions, config.body_threshold_words, false),
            probability_by_body_length(questions, config.body_threshold_words, true)};
        write_conditionals(reports, table);
        write_conditionals_plot(reports, plot);
    } else if (name == "tag_extremes") {
        auto labels = tagged_labels(questions);
        auto extremes = tag_acceptance_extremes(per_tag_acceptance(labels, config.min_uses), config.extremes_k);
        write_tag_extremes(extremes, table);
        write_tag_extremes_plot(extremes, plot);
    } else if (name == "tag_ranking") {
        if (!tag_stats) throw ConfigError("report tag_ranking needs tag statistics");
        auto ranking = rank_tags(*tag_stats, config.ranking_metric, config.ranking_min_count);
        write_ranking(table, ranking, config.ranking_metric);
        plot << "x,y\n";
        for (const auto& [tag, value] : ranking) plot << csv_escape(tag) << ',' << format_real(value) << '\n';
    } else {
        throw ConfigError("unknown report '" + std::string(name) + "'");
    }

    for (const auto& [path, text] : {std::pair{table_path, table.str()}, std::pair{plot_path, plot.str()}}) {
        auto out = open_output(path);
        out << text;
        close_output(out, path);
    }
    return {table_path.string(), plot_path.string()};
}

} // namespace soq
