#pragma once

#include "scoregan/common.hpp"

namespace scoregan {

/// Softmax of a logit vector with max-subtraction for overflow safety.
template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& logits) {
  if (logits.size() == 0) throw ArgumentError("softmax: empty input");
  if (!logits.allFinite()) throw NumericError("softmax: non-finite input");
  Vector v = logits.template cast<Scalar>();
  Scalar m = v.maxCoeff();
  Vector e = (v.array() - m).exp();
  return e / e.sum();
}

/// Column-wise log-softmax, max-subtracted.
template <typename Derived>
Matrix log_softmax_cols_value(const Eigen::MatrixBase<Derived>& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Scalar m = logits.col(j).maxCoeff();
    Vector sh = logits.col(j).array() - m;
    out.col(j) = sh.array() - std::log(sh.array().exp().sum());
  }
  return out;
}

/// Column-wise softmax.
template <typename Derived>
Matrix softmax_cols_value(const Eigen::MatrixBase<Derived>& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) out.col(j) = softmax(logits.col(j));
  return out;
}

template <typename Derived>
Matrix sigmoid_value(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](Scalar v) {
    return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
}

}  // namespace scoregan
