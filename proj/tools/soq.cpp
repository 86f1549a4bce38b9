// Command-line entry point for the accepted-answer prediction pipeline.

#include "soq/error.hpp"
#include "soq/evaluation.hpp"
#include "soq/gbdt.hpp"
#include "soq/pipeline.hpp"
#include "soq/predict_service.hpp"
#include "soq/training_data.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

void add_gbdt_options(CLI::App& cmd, soq::GbdtParams& p) {
    cmd.add_option("--eta", p.eta, "Learning rate")->capture_default_str();
    cmd.add_option("--max-depth", p.max_depth, "Maximum tree depth")->capture_default_str();
    cmd.add_option("--min-child-weight", p.min_child_weight, "Minimum hessian sum per child")->capture_default_str();
    cmd.add_option("--gamma", p.gamma, "Minimum split gain")->capture_default_str();
    cmd.add_option("--colsample-bytree", p.colsample_bytree, "Column fraction sampled per tree")->capture_default_str();
    cmd.add_option("--num-parallel-tree", p.num_parallel_tree, "Trees averaged per round")->capture_default_str();
    cmd.add_option("--lambda", p.lambda, "L2 leaf regularization")->capture_default_str();
    cmd.add_option("--num-rounds", p.num_rounds, "Boosting rounds")->capture_default_str();
    cmd.add_option("--seed", p.seed, "Random seed")->capture_default_str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw soq::DataError("cannot write '" + path + "'");
    return out;
}

std::string read_file(const std::string& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw soq::DataError("cannot open " + std::string(what) + " '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

soq::GbdtEnsemble read_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw soq::DataError("cannot open model file '" + path + "'");
    return soq::load_model(in);
}

soq::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Accepted-answer prediction for Stack Overflow questions"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    // ingest
    soq::IngestPaths ingest_paths;
    soq::IngestConfig ingest_config;
    std::string store_dir;
    auto* ingest = app.add_subcommand("ingest", "Parse the dump files into an intermediate store");
    ingest->add_option("--posts", ingest_paths.posts, "Posts.xml")->required();
    ingest->add_option("--tags", ingest_paths.tags, "Tags.xml")->required();
    ingest->add_option("--badges", ingest_paths.badges, "Badges.xml")->required();
    ingest->add_option("--users", ingest_paths.users, "Users.xml")->required();
    ingest->add_option("--followers", ingest_paths.followers, "tag,followers file")->required();
    ingest->add_option("--store", store_dir, "Output store directory")->required();
    ingest->add_option("--alpha", ingest_config.alpha, "time_index scale factor")->capture_default_str();

    // build
    soq::BuildConfig build_config;
    std::string build_out, dump_end_text;
    auto* build = app.add_subcommand("build", "Assemble the labeled feature matrix");
    build->add_option("--store", store_dir, "Store directory from ingest")->required();
    build->add_option("--out-dir", build_out, "Directory for matrix.csv and questions.csv")->required();
    build->add_option("--cutoff-days", build_config.cutoff_days, "Drop questions this recent")->capture_default_str();
    build->add_option("--dump-end", dump_end_text, "Override the dump end timestamp (UTC)");

    // train
    soq::GbdtParams params;
    std::string matrix_path, model_path;
    auto* train = app.add_subcommand("train", "Train a boosted-tree model");
    train->add_option("--matrix", matrix_path, "Feature matrix file")->required();
    train->add_option("--out", model_path, "Model file to write")->required();
    add_gbdt_options(*train, params);

    // evaluate
    soq::CvOptions cv;
    std::string model_kind = "gbdt", report_csv;
    auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validated AUC");
    evaluate->add_option("--matrix", matrix_path, "Feature matrix file")->required();
    evaluate->add_option("--k", cv.k, "Number of folds")->capture_default_str();
    evaluate->add_flag("--stratified", cv.stratified, "Balance labels across folds");
    evaluate->add_option("--model", model_kind, "gbdt or cart")->check(CLI::IsMember({"gbdt", "cart"}))->capture_default_str();
    evaluate->add_option("--cart-max-depth", cv.cart_max_depth, "Depth of the CART baseline")->capture_default_str();
    evaluate->add_option("--out-csv", report_csv, "Also write fold,size,auc rows here");
    add_gbdt_options(*evaluate, params);

    // importance
    std::string importance_out;
    auto* importance = app.add_subcommand("importance", "Split-count feature importance of a model");
    importance->add_option("--model", model_path, "Model file")->required();
    importance->add_option("--out", importance_out, "Output file (default stdout)");

    // report
    std::string report_name, questions_path, tag_stats_path, report_dir, metric_name = "tag_quality";
    soq::ReportConfig report_config;
    auto* report = app.add_subcommand("report", "Descriptive acceptance-rate reports");
    report->add_option("name", report_name, "trend, badges, tagcount, bodylen, tag_extremes, tag_ranking or all")
        ->required()
        ->check(CLI::IsMember(std::vector<std::string>(soq::kReportNames.begin(), soq::kReportNames.end())));
    report->add_option("--questions", questions_path, "questions.csv from build");
    report->add_option("--tag-stats", tag_stats_path, "tag_stats.csv from ingest (tag_ranking)");
    report->add_option("--out-dir", report_dir, "Output directory")->required();
    report->add_option("--body-threshold", report_config.body_threshold_words, "Word threshold for bodylen")->capture_default_str();
    report->add_option("--min-uses", report_config.min_uses, "Minimum tag uses for tag_extremes")->capture_default_str();
    report->add_option("--top-k", report_config.extremes_k, "List length for tag_extremes")->capture_default_str();
    report->add_option("--metric", metric_name, "Metric for tag_ranking")->capture_default_str();
    report->add_option("--min-count", report_config.ranking_min_count, "Minimum tag count for tag_ranking")->capture_default_str();

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP prediction service");
    serve->add_option("--model", model_path, "Model file")->required();
    serve->add_option("--tag-stats", tag_stats_path, "tag_stats.csv from ingest")->required();
    serve->add_option("--host", host, "Listen address")->capture_default_str();
    serve->add_option("--port", port, "Listen port (0 = any)")->capture_default_str();

    // predict
    std::string draft_path;
    auto* predict = app.add_subcommand("predict", "Score one draft question without a server");
    predict->add_option("--draft", draft_path, "Draft JSON file")->required();
    predict->add_option("--model", model_path, "Model file")->required();
    predict->add_option("--tag-stats", tag_stats_path, "tag_stats.csv from ingest")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (ingest->parsed()) {
            auto meta = soq::ingest(ingest_paths, store_dir, ingest_config);
            std::cout << "ingested " << meta.count("posts_questions") << " questions, " << meta.count("posts_answers")
                      << " answers, " << meta.count("tags") << " tags into " << store_dir << '\n';
        } else if (build->parsed()) {
            if (!dump_end_text.empty()) {
                auto t = soq::parse_timestamp(dump_end_text);
                if (!t) throw soq::ConfigError("--dump-end: invalid timestamp '" + dump_end_text + "'");
                build_config.dump_end = *t;
            }
            if (build_config.cutoff_days < 0) throw soq::ConfigError("--cutoff-days must not be negative");
            build_config.threads = threads;
            auto output = soq::build_from_store(soq::load_store(store_dir), build_config);
            soq::write_build(output, build_out);
            std::cout << "built " << output.matrix.rows.size() << " rows ("
                      << output.matrix.provenance.count("removed_recent") << " removed by cutoff) into " << build_out
                      << '\n';
        } else if (train->parsed()) {
            params.validate();
            auto data = soq::from_matrix(soq::load_matrix_file(matrix_path));
            auto model = soq::train(data, params, soq::TrainOptions{threads});
            auto out = open_out(model_path);
            soq::save_model(model, out);
            out.close();
            if (!out) throw soq::DataError("error writing '" + model_path + "'");
            std::cout << "trained " << params.num_rounds << " rounds on " << data.rows() << " rows, version "
                      << soq::model_version(model) << '\n';
        } else if (evaluate->parsed()) {
            params.validate();
            cv.model = model_kind == "cart" ? soq::ModelKind::cart : soq::ModelKind::gbdt;
            cv.threads = threads;
            auto data = soq::from_matrix(soq::load_matrix_file(matrix_path));
            auto result = soq::kfold_cv(data, params, cv);
            soq::write_report_text(result, std::cout);
            if (!report_csv.empty()) {
                auto out = open_out(report_csv);
                soq::write_report_csv(result, out);
            }
        } else if (importance->parsed()) {
            auto table = soq::feature_importance(read_model(model_path));
            if (importance_out.empty()) {
                soq::write_importance(table, std::cout);
            } else {
                auto out = open_out(importance_out);
                soq::write_importance(table, out);
            }
        } else if (report->parsed()) {
            report_config.ranking_metric = soq::parse_tag_metric(metric_name);
            std::vector<soq::LabeledQuestion> questions;
            bool needs_questions = report_name != "tag_ranking";
            if (needs_questions) {
                if (questions_path.empty()) throw soq::ConfigError("--questions is required for report " + report_name);
                std::istringstream in(read_file(questions_path, "questions file"));
                questions = soq::read_labeled_questions(in);
            }
            std::optional<soq::TagStatsMap> stats;
            if (!tag_stats_path.empty()) stats = soq::load_tag_stats_file(tag_stats_path);
            if (report_name == "tag_ranking" && !stats) throw soq::ConfigError("--tag-stats is required for tag_ranking");
            for (const auto& file : soq::write_report(report_name, questions, stats ? &*stats : nullptr, report_config,
                                                      report_dir)) {
                std::cout << file << '\n';
            }
        } else if (serve->parsed()) {
            auto service = soq::load_service(model_path, tag_stats_path);
            soq::HttpServer server(service);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            bool ok = server.listen(host, port, [&](int bound) {
                std::cout << "listening on " << host << ':' << bound << " model " << service.version() << std::endl;
            });
            g_server = nullptr;
            if (!ok) throw soq::ConfigError("cannot listen on " + host + ":" + std::to_string(port));
        } else if (predict->parsed()) {
            auto service = soq::load_service(model_path, tag_stats_path);
            auto reply = service.handle_predict(read_file(draft_path, "draft file"));
            std::cout << reply.body << '\n';
            if (reply.status != 200) {
                std::cerr << "error: draft rejected (" << reply.status << ")\n";
                return kExitData;
            }
        }
    } catch (const soq::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const soq::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
