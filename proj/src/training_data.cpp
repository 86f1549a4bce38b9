#include "soq/training_data.hpp"

#include "soq/dataset.hpp"

namespace soq {

void TrainingData::add_row(std::span<const double> features, int label) {
    values.insert(values.end(), features.begin(), features.end());
    labels.push_back(label);
}

TrainingData from_matrix(const FeatureMatrix& matrix) {
    TrainingData data;
    data.names = matrix.names;
    data.values.reserve(matrix.rows.size() * matrix.names.size());
    data.labels.reserve(matrix.rows.size());
    for (const auto& row : matrix.rows) data.add_row(row.features, row.label);
    return data;
}

TrainingData from_matrix(const FeatureMatrix& matrix, std::span<const std::size_t> rows) {
    TrainingData data;
    data.names = matrix.names;
    data.values.reserve(rows.size() * matrix.names.size());
    data.labels.reserve(rows.size());
    for (std::size_t r : rows) data.add_row(matrix.rows[r].features, matrix.rows[r].label);
    return data;
}

TrainingData subset(const TrainingData& data, std::span<const std::size_t> rows) {
    TrainingData out;
    out.names = data.names;
    out.values.reserve(rows.size() * data.num_features());
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.add_row(data.row(r), data.labels[r]);
    return out;
}

} // namespace soq
