#include "soq/predict_service.hpp"

#include "soq/content_features.hpp"
#include "soq/error.hpp"
#include "soq/pipeline.hpp"

#include "httplib.h"
#include "json.hpp"

#include <cmath>
#include <fstream>

namespace soq {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kDraftFields{"title", "body_html", "tags", "asked_at", "asker"};
constexpr std::array<std::string_view, 6> kAskerCounts{"prior_questions",           "prior_answers",
                                                       "prior_accepted_answers",    "prior_questions_score_sum",
                                                       "prior_answers_score_sum",   "membership_duration_days"};

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

std::string lowercase_trimmed(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::int64_t* count_field(AskerSnapshot& s, std::string_view key) {
    if (key == "prior_questions") return &s.prior_questions;
    if (key == "prior_answers") return &s.prior_answers;
    if (key == "prior_accepted_answers") return &s.prior_accepted_answers;
    if (key == "prior_questions_score_sum") return &s.prior_questions_score_sum;
    if (key == "prior_answers_score_sum") return &s.prior_answers_score_sum;
    return nullptr;
}

void parse_asker(const json& j, AskerSnapshot& asker, std::vector<FieldError>& errors) {
    if (!j.is_object()) {
        errors.push_back({"asker", "must be an object"});
        return;
    }
    asker.user_known = true;
    for (const auto& [key, value] : j.items()) {
        std::string field = "asker." + key;
        if (key == "membership_duration_days") {
            if (!value.is_number() || !std::isfinite(value.get<double>()) || value.get<double>() < 0) {
                errors.push_back({field, "must be a non-negative number"});
            } else {
                asker.membership_duration_days = value.get<double>();
            }
        } else if (auto* target = count_field(asker, key)) {
            bool is_sum = key.ends_with("_score_sum");
            if (!value.is_number_integer()) {
                errors.push_back({field, "must be an integer"});
            } else if (!is_sum && value.get<std::int64_t>() < 0) {
                errors.push_back({field, "must not be negative"});
            } else {
                *target = value.get<std::int64_t>();
            }
        } else if (key.starts_with("badge_") && badge_index(std::string_view(key).substr(6)) &&
                   kBadgeKeys[*badge_index(std::string_view(key).substr(6))] == std::string_view(key).substr(6)) {
            if (!value.is_boolean()) {
                errors.push_back({field, "must be true or false"});
            } else {
                asker.badges[*badge_index(std::string_view(key).substr(6))] = value.get<bool>();
            }
        } else {
            errors.push_back({field, "unknown field"});
        }
    }
}

ordered_json tag_stats_json(const std::string& name, const TagStats* stats) {
    ordered_json j;
    j["name"] = name;
    j["known"] = stats != nullptr;
    TagStats zero;
    const TagStats& s = stats ? *stats : zero;
    j["tag_id"] = s.tag_id;
    j["count"] = s.count;
    j["followers"] = s.followers;
    j["followers_known"] = stats ? s.followers_known : false;
    j["time_index"] = s.time_index;
    j["popularity"] = s.popularity;
    j["expert_ratio"] = s.expert_ratio;
    j["problem_rate"] = s.problem_rate;
    j["tag_quality"] = s.tag_quality;
    j["ratios_defined"] = stats ? s.ratios_defined : false;
    return j;
}

} // namespace

DraftParse parse_draft(std::string_view json_text) {
    DraftParse result;
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) {
        result.errors.push_back({"body", "request body is not valid JSON"});
        return result;
    }
    if (!j.is_object()) {
        result.errors.push_back({"body", "request body must be a JSON object"});
        return result;
    }
    auto& errors = result.errors;
    QuestionDraft draft;

    for (const auto& [key, value] : j.items()) {
        if (std::find(kDraftFields.begin(), kDraftFields.end(), key) == kDraftFields.end()) {
            errors.push_back({key, "unknown field"});
        }
    }

    if (!j.contains("title")) {
        errors.push_back({"title", "is required"});
    } else if (!j["title"].is_string()) {
        errors.push_back({"title", "must be a string"});
    } else if (is_blank(j["title"].get_ref<const std::string&>())) {
        errors.push_back({"title", "must not be empty"});
    } else {
        draft.title = j["title"].get<std::string>();
    }

    if (!j.contains("body_html")) {
        errors.push_back({"body_html", "is required"});
    } else if (!j["body_html"].is_string()) {
        errors.push_back({"body_html", "must be a string"});
    } else {
        draft.body_html = j["body_html"].get<std::string>();
    }

    if (!j.contains("tags")) {
        errors.push_back({"tags", "is required"});
    } else if (!j["tags"].is_array()) {
        errors.push_back({"tags", "must be an array of tag names"});
    } else if (j["tags"].empty() || j["tags"].size() > 5) {
        errors.push_back({"tags", "must contain between 1 and 5 tags, got " + std::to_string(j["tags"].size())});
    } else {
        const auto& tags = j["tags"];
        for (std::size_t i = 0; i < tags.size(); ++i) {
            std::string field = "tags[" + std::to_string(i) + "]";
            if (!tags[i].is_string()) {
                errors.push_back({field, "must be a string"});
                continue;
            }
            auto name = lowercase_trimmed(tags[i].get_ref<const std::string&>());
            if (name.empty()) {
                errors.push_back({field, "must not be empty"});
            } else if (name.find_first_of("<> \t") != std::string::npos) {
                errors.push_back({field, "must not contain spaces or angle brackets"});
            } else if (std::find(draft.tags.begin(), draft.tags.end(), name) != draft.tags.end()) {
                errors.push_back({field, "duplicate tag '" + name + "'"});
            } else {
                draft.tags.push_back(name);
            }
        }
    }

    if (j.contains("asked_at") && !j["asked_at"].is_null()) {
        if (!j["asked_at"].is_string()) {
            errors.push_back({"asked_at", "must be a timestamp string"});
        } else if (auto t = parse_timestamp(j["asked_at"].get_ref<const std::string&>())) {
            if (*t < site_launch()) {
                errors.push_back({"asked_at", "must not precede 2008-07-31T00:00:00"});
            } else {
                draft.asked_at = *t;
            }
        } else {
            errors.push_back({"asked_at", "expected YYYY-MM-DDTHH:MM:SS, got '" + j["asked_at"].get<std::string>() + "'"});
        }
    }

    if (j.contains("asker") && !j["asker"].is_null()) parse_asker(j["asker"], draft.asker, errors);

    if (errors.empty()) result.draft = std::move(draft);
    return result;
}

std::string draft_to_json(const QuestionDraft& draft) {
    ordered_json j;
    j["title"] = draft.title;
    j["body_html"] = draft.body_html;
    j["tags"] = draft.tags;
    if (draft.asked_at) j["asked_at"] = format_timestamp(*draft.asked_at);
    ordered_json asker;
    asker["membership_duration_days"] = draft.asker.membership_duration_days;
    for (auto key : kAskerCounts) {
        if (auto* v = count_field(const_cast<AskerSnapshot&>(draft.asker), key)) asker[std::string(key)] = *v;
    }
    for (std::size_t b = 0; b < kBadgeCount; ++b) {
        asker["badge_" + std::string(kBadgeKeys[b])] = draft.asker.badges[b];
    }
    j["asker"] = asker;
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

PredictService::PredictService(std::optional<GbdtEnsemble> model, TagStatsMap tag_stats, Clock clock)
    : model_(std::move(model)), tag_stats_(std::move(tag_stats)), clock_(std::move(clock)) {
    if (!clock_) {
        clock_ = [] { return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()); };
    }
    if (model_) {
        verify_feature_names(model_->feature_names, "model");
        version_ = model_version(*model_);
        auto table = feature_importance(*model_);
        for (const auto& [feature, count] : table.ranked) {
            if (count == 0 || top_factors_.size() == kTopFactorCount) break;
            top_factors_.emplace_back(table.names[feature], count);
        }
    }
}

FeatureValues PredictService::draft_features(const QuestionDraft& draft) const {
    Timestamp asked = draft.asked_at ? *draft.asked_at : clock_();
    return assemble_features(extract_content_features(draft.title, draft.body_html),
                             question_tag_features(draft.tags, tag_stats_), metadata_features(asked), draft.asker);
}

PredictionResponse PredictService::predict(const QuestionDraft& draft) const {
    if (!model_) throw ConfigError("no model loaded");
    PredictionResponse r;
    r.features = draft_features(draft);
    r.probability = soq::predict(*model_, r.features);
    r.top_factors = top_factors_;
    r.model_version = version_;
    return r;
}

std::string response_to_json(const PredictionResponse& response) {
    ordered_json j;
    j["probability"] = response.probability;
    ordered_json features = ordered_json::object();
    const auto& names = feature_names();
    for (std::size_t i = 0; i < kFeatureCount; ++i) features[std::string(names[i])] = response.features[i];
    j["features"] = features;
    ordered_json factors = ordered_json::array();
    for (const auto& [name, count] : response.top_factors) factors.push_back({{"feature", name}, {"importance", count}});
    j["top_factors"] = factors;
    j["model_version"] = response.model_version;
    return j.dump();
}

std::string field_errors_to_json(const std::vector<FieldError>& errors) {
    ordered_json list = ordered_json::array();
    for (const auto& e : errors) list.push_back({{"field", e.field}, {"message", e.message}});
    ordered_json j;
    j["errors"] = list;
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

HttpReply PredictService::handle_predict(std::string_view body) const {
    if (!model_) return {503, R"({"errors":[{"field":"model","message":"no model loaded"}]})"};
    auto parsed = parse_draft(body);
    if (!parsed.draft) return {400, field_errors_to_json(parsed.errors)};
    return {200, response_to_json(predict(*parsed.draft))};
}

HttpReply PredictService::handle_tag_metrics(const std::optional<std::string>& name) const {
    if (!name) return {400, field_errors_to_json({{"name", "query parameter is required"}})};
    auto key = lowercase_trimmed(*name);
    if (key.empty()) return {400, field_errors_to_json({{"name", "must not be empty"}})};
    auto it = tag_stats_.find(key);
    return {200, tag_stats_json(key, it == tag_stats_.end() ? nullptr : &it->second).dump()};
}

HttpReply PredictService::handle_health() const {
    ordered_json j;
    if (!model_) {
        j["status"] = "unavailable";
        j["model_version"] = nullptr;
        return {503, j.dump()};
    }
    j["status"] = "ok";
    j["model_version"] = version_;
    return {200, j.dump()};
}

PredictService load_service(const std::string& model_path, const std::string& tag_stats_path) {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + model_path + "'");
    auto model = load_model(in);
    return PredictService(std::move(model), load_tag_stats_file(tag_stats_path));
}

struct HttpServer::Impl {
    const PredictService& service;
    httplib::Server server;

    explicit Impl(const PredictService& s) : service(s) {
        auto send = [](httplib::Response& res, const HttpReply& reply) {
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        };
        server.Post("/v1/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.handle_predict(req.body));
        });
        server.Get("/v1/tags/metrics", [this, send](const httplib::Request& req, httplib::Response& res) {
            std::optional<std::string> name;
            if (req.has_param("name")) name = req.get_param_value("name");
            send(res, service.handle_tag_metrics(name));
        });
        server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, service.handle_health());
        });
        server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            int status = 500;
            try {
                std::rethrow_exception(ep);
            } catch (const DataError& e) {
                status = 400;
                message = e.what();
            } catch (const std::exception& e) {
                message = e.what();
            }
            send(res, {status, field_errors_to_json({{"body", message}})});
        });
    }
};

HttpServer::HttpServer(const PredictService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port, const std::function<void(int)>& on_ready) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) return false;
    } else if (!impl_->server.bind_to_port(host, port)) {
        return false;
    }
    if (on_ready) on_ready(bound);
    return impl_->server.listen_after_bind();
}

void HttpServer::stop() { impl_->server.stop(); }

} // namespace soq
