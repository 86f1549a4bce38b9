#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace soq {

struct FeatureMatrix;

/// Dense row-major design matrix with binary labels. Independent of the
/// 52-column question schema so learners can be exercised on small problems.
struct TrainingData {
    std::vector<std::string> names;
    std::vector<double> values;  // rows() * num_features(), row-major
    std::vector<int> labels;

    std::size_t rows() const { return labels.size(); }
    std::size_t num_features() const { return names.size(); }
    double at(std::size_t row, std::size_t feature) const { return values[row * names.size() + feature]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * names.size(), names.size()}; }

    void add_row(std::span<const double> features, int label);
};

TrainingData from_matrix(const FeatureMatrix& matrix);
/// Restricts to the given row indices, in that order.
TrainingData from_matrix(const FeatureMatrix& matrix, std::span<const std::size_t> rows);
TrainingData subset(const TrainingData& data, std::span<const std::size_t> rows);

} // namespace soq
