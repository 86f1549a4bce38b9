#include "soq/cart.hpp"

#include "soq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace soq {

namespace {

double gini(double positives, double total) {
    if (total <= 0) return 0;
    double p = positives / total;
    return 2 * p * (1 - p);
}

struct CartGrower {
    const TrainingData& data;
    int max_depth;
    Tree tree;
    std::vector<std::size_t> scratch;

    int grow(std::vector<std::size_t> rows, int depth) {
        int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double total = static_cast<double>(rows.size());
        double pos = 0;
        for (auto r : rows) pos += data.labels[r];
        tree.nodes[static_cast<std::size_t>(index)].weight = total > 0 ? pos / total : 0;
        if (depth >= max_depth || pos == 0 || pos == total) return index;

        const double parent = total * gini(pos, total);
        int best_feature = -1;
        double best_threshold = 0, best_gain = 1e-12;
        for (std::size_t f = 0; f < data.num_features(); ++f) {
            scratch = rows;
            std::stable_sort(scratch.begin(), scratch.end(),
                             [&](std::size_t a, std::size_t b) { return data.at(a, f) < data.at(b, f); });
            double left_pos = 0;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                left_pos += data.labels[scratch[i]];
                double v = data.at(scratch[i], f), next = data.at(scratch[i + 1], f);
                if (!(v < next)) continue;
                double nl = static_cast<double>(i + 1), nr = total - nl;
                double gain = parent - nl * gini(left_pos, nl) - nr * gini(pos - left_pos, nr);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = split_threshold(v, next);
                }
            }
        }
        if (best_feature < 0) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (data.at(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        int l = grow(std::move(left), depth + 1);
        int r = grow(std::move(right), depth + 1);
        TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
        n.feature = best_feature;
        n.threshold = best_threshold;
        n.left = l;
        n.right = r;
        return index;
    }
};

} // namespace

double CartModel::predict(std::span<const double> row) const {
    if (row.size() != feature_names.size()) throw DataError("cart predict: arity mismatch");
    return tree.predict(row);
}

CartModel train_cart(const TrainingData& data, int max_depth) {
    if (data.rows() == 0) throw DataError("train_cart: empty training set");
    if (max_depth < 0) throw ConfigError("train_cart: max_depth must be >= 0");
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t j = 0; j < data.num_features(); ++j) {
            if (!std::isfinite(data.at(r, j))) {
                throw DataError("train_cart: non-finite value at row " + std::to_string(r) + ", column '" +
                                data.names[j] + "'");
            }
        }
    }
    CartGrower grower{data, max_depth, {}, {}};
    std::vector<std::size_t> rows(data.rows());
    std::iota(rows.begin(), rows.end(), 0);
    grower.grow(std::move(rows), 0);
    return {std::move(grower.tree), data.names};
}

} // namespace soq
