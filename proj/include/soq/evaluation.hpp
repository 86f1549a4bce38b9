#pragma once

#include "soq/cart.hpp"
#include "soq/gbdt.hpp"
#include "soq/training_data.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace soq {

/// Seeded shuffle of [0, n) split into k folds whose sizes differ by at most
/// one. With `stratified`, each class is dealt across folds separately.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed,
                                                 const std::vector<int>* labels_for_stratification = nullptr);

enum class ModelKind { gbdt, cart };

struct CvOptions {
    std::size_t k = 10;
    bool stratified = false;
    ModelKind model = ModelKind::gbdt;
    int cart_max_depth = 10;
    unsigned threads = 1;
};

struct EvalReport {
    std::vector<double> fold_auc;
    std::vector<std::size_t> fold_sizes;
    double mean_auc = 0;
    std::uint64_t seed = 0;
    std::string model;
};

/// k-fold cross-validated AUC. Throws DataError when a held-out fold lacks
/// one of the classes (suggesting stratification) or when n < k.
EvalReport kfold_cv(const TrainingData& data, const GbdtParams& params, const CvOptions& options = {});

void write_report_text(const EvalReport& report, std::ostream& out);
/// `fold,size,auc` rows.
void write_report_csv(const EvalReport& report, std::ostream& out);

/// Split counts per feature (internal nodes splitting on it), descending,
/// ties by feature index.
struct ImportanceTable {
    std::vector<std::string> names;
    std::vector<std::pair<std::size_t, std::int64_t>> ranked;  // (feature index, split count)

    std::int64_t total() const;
    /// Position of a feature in the ranking (0-based).
    std::size_t rank_of(std::size_t feature) const;
};

ImportanceTable feature_importance(const GbdtEnsemble& ensemble);

/// `rank,feature,split_count` rows.
void write_importance(const ImportanceTable& table, std::ostream& out);

} // namespace soq
