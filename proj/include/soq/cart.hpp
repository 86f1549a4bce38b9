#pragma once

#include "soq/gbdt.hpp"
#include "soq/training_data.hpp"

namespace soq {

/// Single classification tree grown greedily on Gini impurity. Leaves hold the
/// fraction of class-1 training rows that reached them.
struct CartModel {
    Tree tree;
    std::vector<std::string> feature_names;

    double predict(std::span<const double> row) const;
};

/// max_depth 0 yields a single leaf emitting the base rate.
/// Throws DataError on empty or non-finite input.
CartModel train_cart(const TrainingData& data, int max_depth);

} // namespace soq
