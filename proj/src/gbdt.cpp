#include "soq/gbdt.hpp"

#include "soq/error.hpp"
#include "soq/parallel.hpp"
#include "soq/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

namespace soq {

using nlohmann::json;

void GbdtParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid GBDT parameter: " + what); };
    if (!(eta > 0 && eta <= 1)) fail("eta must be in (0, 1]");
    if (max_depth < 1) fail("max_depth must be >= 1");
    if (!(min_child_weight >= 0)) fail("min_child_weight must be >= 0");
    if (!(gamma >= 0)) fail("gamma must be >= 0");
    if (!(colsample_bytree > 0 && colsample_bytree <= 1)) fail("colsample_bytree must be in (0, 1]");
    if (num_parallel_tree < 1) fail("num_parallel_tree must be >= 1");
    if (!(lambda >= 0)) fail("lambda must be >= 0");
    if (num_rounds < 1) fail("num_rounds must be >= 1");
}

double Tree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const TreeNode& n = nodes[i];
        double v = row[static_cast<std::size_t>(n.feature)];
        bool left = std::isnan(v) ? n.missing_goes_left : v < n.threshold;
        i = static_cast<std::size_t>(left ? n.left : n.right);
    }
    return nodes[i].weight;
}

int Tree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].is_leaf()) continue;
        d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        deepest = std::max(deepest, d[i] + 1);
    }
    return deepest;
}

std::size_t Tree::internal_nodes() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

double GbdtEnsemble::margin(std::span<const double> row) const {
    double total = 0;
    for (const auto& trees : rounds) {
        double sum = 0;
        for (const auto& tree : trees) sum += tree.predict(row);
        total += sum / static_cast<double>(trees.size());
    }
    return base_score + params.eta * total;
}

double sigmoid(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

double predict(const GbdtEnsemble& ensemble, std::span<const double> row) {
    if (row.size() != ensemble.feature_names.size()) {
        throw DataError("predict: row has " + std::to_string(row.size()) + " features, model expects " +
                        std::to_string(ensemble.feature_names.size()));
    }
    return sigmoid(ensemble.margin(row));
}

double logistic_loss(const GbdtEnsemble& ensemble, const TrainingData& data) {
    double total = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        double m = ensemble.margin(data.row(r));
        // log(1 + e^m) - y*m, computed stably
        double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        total += softplus - data.labels[r] * m;
    }
    return total / static_cast<double>(data.rows());
}

double split_threshold(double lo, double hi) {
    double mid = lo + (hi - lo) / 2;
    return mid > lo ? mid : hi;
}

bool improves_gain(double gain, double best) {
    if (std::isinf(best) && best < 0) return true;
    return gain > best + 1e-10 * std::max(1.0, std::abs(best));
}

namespace {

/// Shared per-training precomputation: column copies and presorted orders.
struct ColumnStore {
    std::size_t rows = 0;
    std::vector<std::vector<double>> columns;
    std::vector<std::vector<std::uint32_t>> sorted;

    explicit ColumnStore(const TrainingData& data) : rows(data.rows()) {
        std::size_t f = data.num_features();
        columns.assign(f, std::vector<double>(rows));
        sorted.assign(f, std::vector<std::uint32_t>(rows));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < f; ++j) columns[j][r] = data.at(r, j);
        }
        for (std::size_t j = 0; j < f; ++j) {
            auto& order = sorted[j];
            std::iota(order.begin(), order.end(), 0u);
            const auto& col = columns[j];
            std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
        }
    }
};

class TreeGrower {
public:
    TreeGrower(const ColumnStore& store, const std::vector<double>& grad, const std::vector<double>& hess,
               const GbdtParams& params, std::vector<std::size_t> features)
        : store_(store), grad_(grad), hess_(hess), params_(params), features_(std::move(features)),
          goes_left_(store.rows, 0), scratch_(store.rows) {
        order_.reserve(features_.size());
        for (std::size_t f : features_) order_.push_back(store_.sorted[f]);
    }

    /// Grows the tree and writes each training row's leaf weight to `row_output`.
    Tree grow(std::vector<double>& row_output) {
        Tree tree;
        tree.nodes.emplace_back();
        struct Pending {
            int node;
            std::size_t lo, hi;
            int depth;
            double g, h;
        };
        double g0 = 0, h0 = 0;
        for (std::size_t r = 0; r < store_.rows; ++r) {
            g0 += grad_[r];
            h0 += hess_[r];
        }
        std::vector<Pending> stack{{0, 0, store_.rows, 0, g0, h0}};
        while (!stack.empty()) {
            Pending p = stack.back();
            stack.pop_back();
            SplitResult split;
            if (p.depth < params_.max_depth && p.hi - p.lo >= 2) split = best_split(p.lo, p.hi, p.g, p.h);
            if (split.slot < 0) {
                double w = -p.g / (p.h + params_.lambda);
                tree.nodes[static_cast<std::size_t>(p.node)].weight = w;
                for (std::size_t i = p.lo; i < p.hi; ++i) row_output[order_[0][i]] = w;
                continue;
            }
            std::size_t mid = p.lo + split.left_count;
            partition(p.lo, p.hi, static_cast<std::size_t>(split.slot), split.left_count);

            int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& n = tree.nodes[static_cast<std::size_t>(p.node)];
            n.feature = static_cast<int>(features_[static_cast<std::size_t>(split.slot)]);
            n.threshold = split.threshold;
            n.left = left;
            n.right = left + 1;
            n.missing_goes_left = true;
            // Right pushed first so the left subtree is expanded first.
            stack.push_back({left + 1, mid, p.hi, p.depth + 1, p.g - split.g_left, p.h - split.h_left});
            stack.push_back({left, p.lo, mid, p.depth + 1, split.g_left, split.h_left});
        }
        return tree;
    }

private:
    struct SplitResult {
        int slot = -1;
        double threshold = 0;
        std::size_t left_count = 0;
        double g_left = 0, h_left = 0;
    };

    double score(double g, double h) const { return g * g / (h + params_.lambda); }

    SplitResult best_split(std::size_t lo, std::size_t hi, double g, double h) const {
        SplitResult best;
        double best_gain = -std::numeric_limits<double>::infinity();
        const double parent = score(g, h);
        const double mcw = params_.min_child_weight;
        for (std::size_t s = 0; s < features_.size(); ++s) {
            const auto& order = order_[s];
            const auto& col = store_.columns[features_[s]];
            double gl = 0, hl = 0;
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                std::uint32_t r = order[i];
                gl += grad_[r];
                hl += hess_[r];
                double v = col[r];
                double next = col[order[i + 1]];
                if (!(v < next)) continue;
                double hr = h - hl;
                if (hl < mcw || hr < mcw) continue;
                double gain = 0.5 * (score(gl, hl) + score(g - gl, hr) - parent) - params_.gamma;
                if (improves_gain(gain, best_gain)) {
                    best_gain = gain;
                    best.slot = static_cast<int>(s);
                    best.threshold = split_threshold(v, next);
                    best.left_count = i + 1 - lo;
                    best.g_left = gl;
                    best.h_left = hl;
                }
            }
        }
        if (!(best_gain > 0)) best.slot = -1;
        return best;
    }

    /// Stable-partitions every feature order in [lo, hi) into left then right rows.
    void partition(std::size_t lo, std::size_t hi, std::size_t slot, std::size_t left_count) {
        const auto& split_order = order_[slot];
        for (std::size_t i = lo; i < hi; ++i) goes_left_[split_order[i]] = i < lo + left_count ? 1 : 0;
        for (std::size_t s = 0; s < order_.size(); ++s) {
            if (s == slot) continue;
            auto& order = order_[s];
            std::size_t l = lo, r = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                std::uint32_t row = order[i];
                if (goes_left_[row]) {
                    order[l++] = row;
                } else {
                    scratch_[r++] = row;
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), order.begin() + static_cast<std::ptrdiff_t>(l));
        }
    }

    const ColumnStore& store_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    const GbdtParams& params_;
    std::vector<std::size_t> features_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<char> goes_left_;
    std::vector<std::uint32_t> scratch_;
};

std::vector<std::size_t> sample_features(std::size_t total, double fraction, std::uint64_t seed) {
    auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, total);
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, total - i));
        std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

void check_training_data(const TrainingData& data) {
    if (data.rows() == 0) throw DataError("train: empty training set");
    if (data.num_features() == 0) throw DataError("train: no feature columns");
    std::size_t pos = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        int y = data.labels[r];
        if (y != 0 && y != 1) throw DataError("train: label of row " + std::to_string(r) + " is not 0/1");
        pos += static_cast<std::size_t>(y);
        for (std::size_t j = 0; j < data.num_features(); ++j) {
            if (!std::isfinite(data.at(r, j))) {
                throw DataError("train: non-finite value at row " + std::to_string(r) + ", column '" +
                                data.names[j] + "'");
            }
        }
    }
    if (pos == 0 || pos == data.rows()) throw DataError("train: training labels contain a single class");
}

} // namespace

namespace detail {

GbdtEnsemble train_unvalidated(const TrainingData& data, const GbdtParams& params, const TrainOptions& options) {
    check_training_data(data);
    const std::size_t n = data.rows();
    double pos = static_cast<double>(std::count(data.labels.begin(), data.labels.end(), 1));

    GbdtEnsemble model;
    model.params = params;
    model.feature_names = data.names;
    model.base_score = std::log(pos / (static_cast<double>(n) - pos));

    ColumnStore store(data);
    std::vector<double> margin(n, model.base_score), grad(n), hess(n);
    const auto trees_per_round = static_cast<std::size_t>(params.num_parallel_tree);
    std::vector<std::vector<double>> outputs(trees_per_round, std::vector<double>(n));

    for (int round = 0; round < params.num_rounds; ++round) {
        for (std::size_t r = 0; r < n; ++r) {
            double p = sigmoid(margin[r]);
            grad[r] = p - data.labels[r];
            hess[r] = p * (1 - p);
        }
        std::vector<Tree> trees(trees_per_round);
        parallel_for(trees_per_round, options.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                auto seed = derive_seed(params.seed, static_cast<std::uint64_t>(round), t);
                TreeGrower grower(store, grad, hess, params,
                                  sample_features(data.num_features(), params.colsample_bytree, seed));
                trees[t] = grower.grow(outputs[t]);
            }
        });
        for (std::size_t r = 0; r < n; ++r) {
            double sum = 0;
            for (std::size_t t = 0; t < trees_per_round; ++t) sum += outputs[t][r];
            margin[r] += params.eta * (sum / static_cast<double>(trees_per_round));
        }
        model.rounds.push_back(std::move(trees));
    }
    return model;
}

} // namespace detail

GbdtEnsemble train(const TrainingData& data, const GbdtParams& params, const TrainOptions& options) {
    params.validate();
    return detail::train_unvalidated(data, params, options);
}

namespace {

json params_to_json(const GbdtParams& p) {
    return json{{"eta", p.eta},
                {"max_depth", p.max_depth},
                {"min_child_weight", p.min_child_weight},
                {"gamma", p.gamma},
                {"colsample_bytree", p.colsample_bytree},
                {"num_parallel_tree", p.num_parallel_tree},
                {"lambda", p.lambda},
                {"num_rounds", p.num_rounds},
                {"seed", p.seed}};
}

GbdtParams params_from_json(const json& j) {
    GbdtParams p;
    p.eta = j.at("eta").get<double>();
    p.max_depth = j.at("max_depth").get<int>();
    p.min_child_weight = j.at("min_child_weight").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.colsample_bytree = j.at("colsample_bytree").get<double>();
    p.num_parallel_tree = j.at("num_parallel_tree").get<int>();
    p.lambda = j.at("lambda").get<double>();
    p.num_rounds = j.at("num_rounds").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

json node_to_json(const Tree& tree, std::size_t i, const std::vector<std::string>& names) {
    const TreeNode& n = tree.nodes[i];
    if (n.is_leaf()) return json{{"leaf", n.weight}};
    return json{{"split", names[static_cast<std::size_t>(n.feature)]},
                {"feature", n.feature},
                {"threshold", n.threshold},
                {"missing", n.missing_goes_left ? "yes" : "no"},
                {"yes", node_to_json(tree, static_cast<std::size_t>(n.left), names)},
                {"no", node_to_json(tree, static_cast<std::size_t>(n.right), names)}};
}

int node_from_json(const json& j, Tree& tree, const std::vector<std::string>& names, int depth) {
    if (depth > 4096) throw DataError("model file: tree too deep");
    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("leaf")) {
        tree.nodes.back().weight = j.at("leaf").get<double>();
        return index;
    }
    TreeNode n;
    n.feature = j.at("feature").get<int>();
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= names.size() ||
        names[static_cast<std::size_t>(n.feature)] != j.at("split").get<std::string>()) {
        throw DataError("model file: split feature does not match the feature list");
    }
    n.threshold = j.at("threshold").get<double>();
    n.missing_goes_left = j.at("missing").get<std::string>() == "yes";
    n.left = node_from_json(j.at("yes"), tree, names, depth + 1);
    n.right = node_from_json(j.at("no"), tree, names, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)] = n;
    return index;
}

json model_body(const GbdtEnsemble& e) {
    json rounds = json::array();
    for (const auto& trees : e.rounds) {
        json round = json::array();
        for (const auto& tree : trees) round.push_back(node_to_json(tree, 0, e.feature_names));
        rounds.push_back(std::move(round));
    }
    return json{{"format", "soq-gbdt"},
                {"format_version", kModelFormatVersion},
                {"objective", "binary:logistic"},
                {"params", params_to_json(e.params)},
                {"base_score", e.base_score},
                {"feature_names", e.feature_names},
                {"rounds", std::move(rounds)}};
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

std::string model_version(const GbdtEnsemble& ensemble) {
    return std::to_string(kModelFormatVersion) + "-" + fnv1a_hex(model_body(ensemble).dump());
}

void save_model(const GbdtEnsemble& ensemble, std::ostream& out) {
    json body = model_body(ensemble);
    body["model_version"] = std::to_string(kModelFormatVersion) + "-" + fnv1a_hex(body.dump());
    out << body.dump(1) << '\n';
}

GbdtEnsemble load_model(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "soq-gbdt") throw DataError("model file: unknown format");
        int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw DataError("model file: unsupported format_version " + std::to_string(version) + " (expected " +
                            std::to_string(kModelFormatVersion) + ")");
        }
        GbdtEnsemble e;
        e.params = params_from_json(j.at("params"));
        e.base_score = j.at("base_score").get<double>();
        e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        for (const auto& round : j.at("rounds")) {
            std::vector<Tree> trees;
            for (const auto& node : round) {
                Tree tree;
                node_from_json(node, tree, e.feature_names, 0);
                trees.push_back(std::move(tree));
            }
            if (trees.empty()) throw DataError("model file: empty round");
            e.rounds.push_back(std::move(trees));
        }
        if (j.contains("model_version") && j.at("model_version").get<std::string>() != model_version(e)) {
            throw DataError("model file: content does not match its model_version");
        }
        return e;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

} // namespace soq
