#pragma once

#include <span>

namespace soq {

/// Area under the ROC curve via the Mann-Whitney U statistic with average
/// ranks for ties: P(score_pos > score_neg) + 0.5 * P(tie). O(n log n).
/// Throws DataError when a class is missing, sizes differ, or a score is NaN.
double auc(std::span<const double> scores, std::span<const int> labels);

} // namespace soq
