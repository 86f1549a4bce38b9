#pragma once

#include "soq/asker_history.hpp"
#include "soq/content_features.hpp"
#include "soq/tag_metrics.hpp"
#include "soq/timestamp.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soq {

inline constexpr std::size_t kFeatureCount = 52;
inline constexpr std::string_view kFeatureSchemaVersion = "soq-features/1";

/// Canonical column order: 17 content, 6 tag, 3 metadata, 26 user features.
const std::array<std::string_view, kFeatureCount>& feature_names();
std::vector<std::string> feature_name_list();

/// Index of a canonical feature name. Throws ConfigError if unknown.
std::size_t feature_index(std::string_view name);

/// Throws DataError naming the first column where `names` diverges from the
/// canonical list. `context` prefixes the message.
void verify_feature_names(std::span<const std::string> names, std::string_view context);

struct MetadataFeatures {
    int asking_day_of_week = 0;  // Monday = 0
    int asking_hour = 0;         // UTC
    double creation_date_days = 0;

    bool operator==(const MetadataFeatures&) const = default;
};

inline constexpr std::array<std::string_view, 3> kMetadataFeatureNames{"asking_day_of_week", "asking_hour",
                                                                       "creation_date_days"};

/// 2008-07-31T00:00:00Z, the origin of creation_date_days.
Timestamp site_launch();

MetadataFeatures metadata_features(Timestamp asked_at);

using FeatureValues = std::array<double, kFeatureCount>;

/// Rounds to the nine significant digits used by the matrix file format, so
/// in-memory rows and exported rows hold identical values.
double quantize(double value);

/// Concatenates the four feature groups in canonical order and quantizes.
/// Throws DataError if a group's name list drifted from the canonical schema.
FeatureValues assemble_features(const ContentFeatures& content, const QuestionTagFeatures& tags,
                                const MetadataFeatures& meta, const AskerSnapshot& asker);

} // namespace soq
