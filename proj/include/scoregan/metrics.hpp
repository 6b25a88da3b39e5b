#pragma once

#include "scoregan/common.hpp"

#include <vector>

namespace scoregan {

struct RankedPrediction {
  Scalar score = 0.0;  // fraud probability in [0, 1]
  bool fraud = false;
};

struct MetricError : std::runtime_error {
  explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rank-walk average precision: mean over positives, in descending-score
/// order, of precision at each positive's rank. Ties keep original order.
Scalar average_precision(const std::vector<RankedPrediction>& preds);

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked correctly,
/// ties counted as 1/2. Exactly equal to exhaustive pair counting.
Scalar auc(const std::vector<RankedPrediction>& preds);

/// Fraction of predictions whose thresholded score matches the label.
Scalar accuracy(const std::vector<RankedPrediction>& preds, Scalar threshold = 0.5);

}  // namespace scoregan
