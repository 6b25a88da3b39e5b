#include "scoregan/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace scoregan {

namespace {

void check_scores(const std::vector<RankedPrediction>& preds) {
  for (const RankedPrediction& p : preds) {
    if (!std::isfinite(p.score)) throw MetricError("non-finite prediction score");
  }
}

}  // namespace

Scalar average_precision(const std::vector<RankedPrediction>& preds) {
  check_scores(preds);
  std::size_t n_pos = 0;
  for (const RankedPrediction& p : preds) n_pos += p.fraud ? 1 : 0;
  if (n_pos == 0) throw MetricError("average precision undefined without positives");

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });

  Scalar sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (preds[order[rank]].fraud) {
      ++hits;
      sum += static_cast<Scalar>(hits) / static_cast<Scalar>(rank + 1);
    }
  }
  return sum / static_cast<Scalar>(n_pos);
}

Scalar auc(const std::vector<RankedPrediction>& preds) {
  check_scores(preds);
  std::size_t n_pos = 0, n_neg = 0;
  for (const RankedPrediction& p : preds) (p.fraud ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) throw MetricError("auc undefined with a single class");

  // Group by score; concordant pairs in integer arithmetic, ties as halves.
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score < preds[b].score;
  });

  long long neg_below = 0;
  Scalar numer = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    long long pos_in_group = 0, neg_in_group = 0;
    while (j < order.size() && preds[order[j]].score == preds[order[i]].score) {
      (preds[order[j]].fraud ? pos_in_group : neg_in_group) += 1;
      ++j;
    }
    numer += static_cast<Scalar>(pos_in_group) * static_cast<Scalar>(neg_below);
    numer += 0.5 * static_cast<Scalar>(pos_in_group) * static_cast<Scalar>(neg_in_group);
    neg_below += neg_in_group;
    i = j;
  }
  return numer / (static_cast<Scalar>(n_pos) * static_cast<Scalar>(n_neg));
}

Scalar accuracy(const std::vector<RankedPrediction>& preds, Scalar threshold) {
  check_scores(preds);
  if (preds.empty()) throw MetricError("accuracy undefined on empty predictions");
  std::size_t correct = 0;
  for (const RankedPrediction& p : preds) {
    bool called_fraud = p.score >= threshold;
    if (called_fraud == p.fraud) ++correct;
  }
  return static_cast<Scalar>(correct) / static_cast<Scalar>(preds.size());
}

}  // namespace scoregan
