#pragma once

#include "soq/asker_history.hpp"
#include "soq/evaluation.hpp"
#include "soq/features.hpp"
#include "soq/gbdt.hpp"
#include "soq/tag_metrics.hpp"
#include "soq/timestamp.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace soq {

/// A question as typed into the prediction tool.
struct QuestionDraft {
    std::string title;
    std::string body_html;
    std::vector<std::string> tags;
    /// Defaults to the time the request is handled.
    std::optional<Timestamp> asked_at;
    /// Defaults to a brand-new user with no history.
    AskerSnapshot asker;
};

struct FieldError {
    std::string field;
    std::string message;

    bool operator==(const FieldError&) const = default;
};

struct DraftParse {
    std::optional<QuestionDraft> draft;
    std::vector<FieldError> errors;
};

/// Validates a JSON request body. Every violation is reported with the
/// offending field (`title`, `tags[2]`, `asker.prior_answers`, ...).
DraftParse parse_draft(std::string_view json_text);

/// JSON form accepted by parse_draft.
std::string draft_to_json(const QuestionDraft& draft);

struct PredictionResponse {
    double probability = 0;
    FeatureValues features{};
    std::vector<std::pair<std::string, std::int64_t>> top_factors;
    std::string model_version;
};

struct HttpReply {
    int status = 200;
    std::string body;  // JSON
};

/// Request handling independent of the HTTP transport. Immutable after
/// construction, so concurrent calls are safe.
class PredictService {
public:
    using Clock = std::function<Timestamp()>;

    PredictService(std::optional<GbdtEnsemble> model, TagStatsMap tag_stats, Clock clock = {});

    bool ready() const { return model_.has_value(); }
    const std::string& version() const { return version_; }

    FeatureValues draft_features(const QuestionDraft& draft) const;
    /// Throws ConfigError when no model is loaded.
    PredictionResponse predict(const QuestionDraft& draft) const;

    HttpReply handle_predict(std::string_view body) const;
    HttpReply handle_tag_metrics(const std::optional<std::string>& name) const;
    HttpReply handle_health() const;

private:
    std::optional<GbdtEnsemble> model_;
    TagStatsMap tag_stats_;
    Clock clock_;
    std::string version_;
    std::vector<std::pair<std::string, std::int64_t>> top_factors_;
};

inline constexpr std::size_t kTopFactorCount = 10;

std::string response_to_json(const PredictionResponse& response);
std::string field_errors_to_json(const std::vector<FieldError>& errors);

/// Loads the model and tag statistics files. Throws DataError on failure.
PredictService load_service(const std::string& model_path, const std::string& tag_stats_path);

/// Serves /v1/predict, /v1/tags/metrics and /v1/health until stopped.
/// `on_ready` receives the bound port (useful with port 0).
class HttpServer {
public:
    explicit HttpServer(const PredictService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and blocks. Returns false when the address cannot be bound.
    bool listen(const std::string& host, int port, const std::function<void(int)>& on_ready = {});
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace soq
