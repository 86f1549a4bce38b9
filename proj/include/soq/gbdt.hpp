#pragma once

#include "soq/training_data.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace soq {

/// Boosting hyperparameters. Defaults are the published best configuration;
/// lambda, num_rounds and seed are not part of it and use conventional values.
struct GbdtParams {
    double eta = 0.56;
    int max_depth = 20;
    double min_child_weight = 1;
    double gamma = 15;
    double colsample_bytree = 0.5;
    int num_parallel_tree = 8;
    double lambda = 1;
    int num_rounds = 100;
    std::uint64_t seed = 42;

    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;

    bool operator==(const GbdtParams&) const = default;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;   // taken when value < threshold
    int right = -1;
    bool missing_goes_left = true;
    double weight = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

/// Binary tree stored as a node array rooted at index 0.
struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> row) const;
    int depth() const;
    std::size_t internal_nodes() const;
    bool operator==(const Tree&) const = default;
};

struct GbdtEnsemble {
    GbdtParams params;
    double base_score = 0;  // prior log-odds
    std::vector<std::string> feature_names;
    std::vector<std::vector<Tree>> rounds;  // rounds x num_parallel_tree

    /// base_score + eta * sum over rounds of the mean parallel-tree output.
    double margin(std::span<const double> row) const;
    bool operator==(const GbdtEnsemble&) const = default;
};

struct TrainOptions {
    /// Worker threads for growing a round's parallel trees (0 = auto).
    /// The trained model does not depend on this value.
    unsigned threads = 1;
};

/// Second-order boosting under logistic loss with exact greedy splits.
/// Throws DataError on empty/single-class input or non-finite values.
GbdtEnsemble train(const TrainingData& data, const GbdtParams& params, const TrainOptions& options = {});

/// Probability of the positive class. Throws DataError on arity mismatch.
double predict(const GbdtEnsemble& ensemble, std::span<const double> row);

double sigmoid(double margin);

/// Mean logistic loss of the ensemble on `data`.
double logistic_loss(const GbdtEnsemble& ensemble, const TrainingData& data);

/// The best split the trainer would choose at a node, exposed for checking
/// against brute force. feature == -1 when no split has positive gain.
struct SplitChoice {
    int feature = -1;
    double threshold = 0;
    double gain = -std::numeric_limits<double>::infinity();
};

/// Split-point between two consecutive distinct sorted values `lo < hi`:
/// their midpoint, nudged so that lo < threshold <= hi.
double split_threshold(double lo, double hi);

/// True when `gain` beats `best` by more than floating-point noise.
bool improves_gain(double gain, double best);

namespace detail {
/// Trains without validating params. Lets tests exercise eta = 0.
GbdtEnsemble train_unvalidated(const TrainingData& data, const GbdtParams& params, const TrainOptions& options);
}

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON model file. Thresholds and weights round-trip exactly.
void save_model(const GbdtEnsemble& ensemble, std::ostream& out);
/// Throws DataError on malformed/truncated input or an unsupported version.
GbdtEnsemble load_model(std::istream& in);

/// Content hash identifying a trained model, e.g. "1-3f9a...".
std::string model_version(const GbdtEnsemble& ensemble);

} // namespace soq
