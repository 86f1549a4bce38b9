#pragma once

#include "soq/content_features.hpp"
#include "soq/gbdt.hpp"
#include "soq/pipeline.hpp"
#include "soq/training_data.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace soq::test {

std::filesystem::path data_dir();
std::filesystem::path e2e_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& child = "") const;

private:
    std::filesystem::path path_;
};

/// Value after a round trip through "%.9g", computed without the library.
double nine_digits(double v);

/// O(n^2) Mann-Whitney count over every (positive, negative) pair.
double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct OracleSplit {
    int feature = -1;
    double lo = 0;  // largest value sent left
    double hi = 0;  // smallest value sent right
    double gain = 0;
};

/// Root split of a one-round, depth-1 boosted tree found by enumerating every
/// feature and every gap between consecutive distinct values.
OracleSplit brute_force_root_split(const TrainingData& data, double lambda, double gamma, double min_child_weight);

struct PlantedSignal {
    TrainingData data;
    std::vector<std::size_t> signal_features;
};

/// 52 standard-normal columns; the label is drawn from a logistic function
/// of five of them plus Gaussian noise.
PlantedSignal planted_signal(std::size_t rows, std::uint64_t seed);

TrainingData shuffle_labels(TrainingData data, std::uint64_t seed);

/// Random problem with `features` columns, values on a coarse grid so ties occur.
TrainingData random_problem(std::mt19937_64& rng, std::size_t rows, std::size_t features);

double standard_normal(std::mt19937_64& rng);

struct RandomHistory {
    std::vector<PostRow> posts;
    std::vector<BadgeAward> badges;
    std::vector<UserRow> users;
    std::int64_t user_id = 1;
    Timestamp first{};
    Timestamp last{};
};

/// One user's questions, answers (some accepted) and badges at random times,
/// plus noise from other users. Event times often coincide.
RandomHistory random_history(std::mt19937_64& rng);

struct GoldenContent {
    std::string name;
    std::string title;
    std::string body_html;
    ContentFeatures expected;
};

/// Hand-traced title/body fixtures.
const std::vector<GoldenContent>& golden_content();

/// Paths of the end-to-end fixture dump.
IngestPaths e2e_paths();

/// Ingests and builds the end-to-end fixture with default settings.
BuildOutput build_e2e(const std::string& store_dir);

struct DesignatedRow {
    std::int64_t id;
    FeatureValues expected;
};

/// Hand-computed 52-column rows for questions 1001, 1002 and 1003.
std::vector<DesignatedRow> designated_rows();

} // namespace soq::test
