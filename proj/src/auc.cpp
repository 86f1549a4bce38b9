#include "soq/auc.hpp"

#include "soq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace soq {

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("auc: scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (double s : scores) {
        if (std::isnan(s)) throw DataError("auc: NaN score");
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double positive_rank_sum = 0;
    std::size_t positives = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Ranks i+1 .. j share their mean.
        double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] != 0) {
                positive_rank_sum += mean_rank;
                ++positives;
            }
        }
        i = j;
    }
    std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) throw DataError("auc: labels contain a single class");
    double p = static_cast<double>(positives);
    double u = positive_rank_sum - p * (p + 1) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

} // namespace soq
