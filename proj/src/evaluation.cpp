#include "soq/evaluation.hpp"

#include "soq/auc.hpp"
#include "soq/error.hpp"
#include "soq/random.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace soq {

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed,
                                                 const std::vector<int>* labels_for_stratification) {
    if (k < 2) throw ConfigError("k-fold: k must be >= 2");
    if (n < k) throw DataError("k-fold: " + std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(splitmix64(seed));
    portable_shuffle(order, rng);
    if (labels_for_stratification) {
        const auto& y = *labels_for_stratification;
        std::stable_partition(order.begin(), order.end(), [&](std::size_t r) { return y[r] != 0; });
    }
    std::vector<std::vector<std::size_t>> folds(k);
    if (labels_for_stratification) {
        // Round-robin dealing keeps both the fold sizes and the class mix balanced.
        for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
    } else {
        std::size_t base = n / k, extra = n % k, pos = 0;
        for (std::size_t f = 0; f < k; ++f) {
            std::size_t size = base + (f < extra ? 1 : 0);
            folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                            order.begin() + static_cast<std::ptrdiff_t>(pos + size));
            pos += size;
        }
    }
    return folds;
}

EvalReport kfold_cv(const TrainingData& data, const GbdtParams& params, const CvOptions& options) {
    if (options.model == ModelKind::gbdt) params.validate();
    auto folds = make_folds(data.rows(), options.k, params.seed, options.stratified ? &data.labels : nullptr);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::size_t pos = 0;
        for (auto r : folds[f]) pos += static_cast<std::size_t>(data.labels[r] != 0);
        if (pos == 0 || pos == folds[f].size()) {
            throw DataError("k-fold: test fold " + std::to_string(f) +
                            " contains a single class; use fewer folds or enable stratification (--stratified)");
        }
    }

    EvalReport report;
    report.seed = params.seed;
    report.model = options.model == ModelKind::gbdt ? "gbdt" : "cart";
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(data.rows() - folds[f].size());
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        TrainingData train_set = subset(data, train_rows);

        std::vector<double> scores;
        std::vector<int> labels;
        scores.reserve(folds[f].size());
        if (options.model == ModelKind::gbdt) {
            GbdtEnsemble model = train(train_set, params, TrainOptions{options.threads});
            for (auto r : folds[f]) scores.push_back(predict(model, data.row(r)));
        } else {
            CartModel model = train_cart(train_set, options.cart_max_depth);
            for (auto r : folds[f]) scores.push_back(model.predict(data.row(r)));
        }
        for (auto r : folds[f]) labels.push_back(data.labels[r]);
        report.fold_auc.push_back(auc(scores, labels));
        report.fold_sizes.push_back(folds[f].size());
    }
    report.mean_auc = std::accumulate(report.fold_auc.begin(), report.fold_auc.end(), 0.0) /
                      static_cast<double>(report.fold_auc.size());
    return report;
}

void write_report_text(const EvalReport& report, std::ostream& out) {
    char buf[64];
    out << "model: " << report.model << "\n";
    out << "folds: " << report.fold_auc.size() << "\n";
    out << "seed: " << report.seed << "\n";
    for (std::size_t f = 0; f < report.fold_auc.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%.6f", report.fold_auc[f]);
        out << "fold " << f << ": n=" << report.fold_sizes[f] << " auc=" << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.6f", report.mean_auc);
    out << "mean auc: " << buf << "\n";
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
    char buf[64];
    out << "fold,size,auc\n";
    for (std::size_t f = 0; f < report.fold_auc.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%.9g", report.fold_auc[f]);
        out << f << ',' << report.fold_sizes[f] << ',' << buf << '\n';
    }
}

std::int64_t ImportanceTable::total() const {
    std::int64_t sum = 0;
    for (const auto& [feature, count] : ranked) sum += count;
    return sum;
}

std::size_t ImportanceTable::rank_of(std::size_t feature) const {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i].first == feature) return i;
    }
    return ranked.size();
}

ImportanceTable feature_importance(const GbdtEnsemble& ensemble) {
    ImportanceTable table;
    table.names = ensemble.feature_names;
    std::vector<std::int64_t> counts(ensemble.feature_names.size(), 0);
    for (const auto& round : ensemble.rounds) {
        for (const auto& tree : round) {
            for (const auto& node : tree.nodes) {
                if (!node.is_leaf()) ++counts[static_cast<std::size_t>(node.feature)];
            }
        }
    }
    for (std::size_t f = 0; f < counts.size(); ++f) table.ranked.emplace_back(f, counts[f]);
    std::stable_sort(table.ranked.begin(), table.ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return table;
}

void write_importance(const ImportanceTable& table, std::ostream& out) {
    out << "rank,feature,split_count\n";
    for (std::size_t i = 0; i < table.ranked.size(); ++i) {
        out << i + 1 << ',' << table.names[table.ranked[i].first] << ',' << table.ranked[i].second << '\n';
    }
}

} // namespace soq
