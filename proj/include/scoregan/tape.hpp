#pragma once

#include "scoregan/common.hpp"
#include "scoregan/param.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace scoregan {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
/// tape lives and is not cleared.
class Var {
 public:
  Var() : tape_(nullptr), id_(-1) {}
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Scalar scalar() const { return value()(0, 0); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_;
  int id_;
};

/// Record of one forward pass. Operations push nodes in topological order;
/// backward() replays the record in reverse and accumulates gradients into
/// every Parameter leaf it reaches. Cleared (or destroyed) between steps.
class Tape {
 public:
  using Pull = std::function<void(Tape&, int)>;

  struct Node {
    Matrix value;
    int parent_a = -1;
    int parent_b = -1;
    Pull pull;                     // distributes grad_[id] to parents
    Parameter* param = nullptr;    // leaf binding, if any
    ParamSet* owner = nullptr;
  };

  int push(Matrix value, int pa, int pb, Pull pull) {
    require_finite(value, "tape operation output");
    nodes_.push_back(Node{std::move(value), pa, pb, std::move(pull), nullptr, nullptr});
    return static_cast<int>(nodes_.size()) - 1;
  }

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  Matrix& grad(int id) { return grads_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    grads_.clear();
  }

  /// Reverse sweep from a scalar loss. Populates Parameter grads for every
  /// trainable leaf that contributed to the loss.
  void backward(const Var& loss) {
    if (loss.tape() != this || loss.id() < 0 ||
        loss.id() >= static_cast<int>(nodes_.size())) {
      throw UsageError("backward: loss is not a value on this tape");
    }
    const Node& top = node(loss.id());
    if (top.value.rows() != 1 || top.value.cols() != 1) {
      throw UsageError("backward: loss must be a scalar");
    }
    grads_.assign(nodes_.size(), Matrix());
    for (int id = 0; id <= loss.id(); ++id) {
      grads_[static_cast<std::size_t>(id)] =
          Matrix::Zero(nodes_[static_cast<std::size_t>(id)].value.rows(),
                       nodes_[static_cast<std::size_t>(id)].value.cols());
    }
    grads_[static_cast<std::size_t>(loss.id())](0, 0) = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.param != nullptr) {
        n.param->grad += grads_[static_cast<std::size_t>(id)];
        n.owner->mark_grads_populated();
      }
      if (n.pull) n.pull(*this, id);
    }
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
};

inline const Matrix& Var::value() const { return tape_->node(id_).value; }

// ---------------------------------------------------------------------------
// Primitive operations. Free functions so composite models read as plain math.
// ---------------------------------------------------------------------------

inline Var constant(Tape& t, Matrix value) {
  return Var(&t, t.push(std::move(value), -1, -1, nullptr));
}

inline Var scalar_constant(Tape& t, Scalar v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(t, std::move(m));
}

/// Trainable leaf bound to a named parameter. Gradients accumulate into the
/// parameter's grad slot on backward.
inline Var leaf(Tape& t, ParamSet& params, const std::string& name) {
  Parameter& p = params.at(name);
  int id = t.push(p.value, -1, -1, nullptr);
  t.node(id).param = &p;
  t.node(id).owner = &params;
  return Var(&t, id);
}

inline Var matmul(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  Matrix out = a.value() * b.value();
  int ia = a.id(), ib = b.id();
  return Var(&t, t.push(std::move(out), ia, ib, [ia, ib](Tape& tp, int id) {
               const Matrix& g = tp.grad(id);
               tp.grad(ia).noalias() += g * tp.node(ib).value.transpose();
               tp.grad(ib).noalias() += tp.node(ia).value.transpose() * g;
             }));
}

inline Var add(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return Var(&t, t.push(a.value() + b.value(), ia, ib, [ia, ib](Tape& tp, int id) {
               tp.grad(ia) += tp.grad(id);
               tp.grad(ib) += tp.grad(id);
             }));
}

/// a (n x m) plus a column vector b (n x 1) broadcast over columns.
inline Var add_colvec(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  Matrix out = a.value().colwise() + Eigen::Ref<const Vector>(b.value().col(0));
  return Var(&t, t.push(std::move(out), ia, ib, [ia, ib](Tape& tp, int id) {
               tp.grad(ia) += tp.grad(id);
               tp.grad(ib) += tp.grad(id).rowwise().sum();
             }));
}

inline Var scale(const Var& a, Scalar s) {
  Tape& t = *a.tape();
  int ia = a.id();
  return Var(&t, t.push(a.value() * s, ia, -1, [ia, s](Tape& tp, int id) {
               tp.grad(ia) += s * tp.grad(id);
             }));
}

inline Var sub(const Var& a, const Var& b) { return add(a, scale(b, -1.0)); }

/// Elementwise product of two recorded values.
inline Var cmul(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return Var(&t, t.push(a.value().cwiseProduct(b.value()), ia, ib,
                        [ia, ib](Tape& tp, int id) {
                          const Matrix& g = tp.grad(id);
                          tp.grad(ia) += g.cwiseProduct(tp.node(ib).value);
                          tp.grad(ib) += g.cwiseProduct(tp.node(ia).value);
                        }));
}

/// Elementwise product with a fixed (non-differentiated) matrix.
inline Var cmul_const(const Var& a, Matrix m) {
  Tape& t = *a.tape();
  int ia = a.id();
  Matrix out = a.value().cwiseProduct(m);
  return Var(&t, t.push(std::move(out), ia, -1,
                        [ia, m = std::move(m)](Tape& tp, int id) {
                          tp.grad(ia) += tp.grad(id).cwiseProduct(m);
                        }));
}

/// Vertical concatenation (stack rows).
inline Var vcat(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  Matrix out(a.value().rows() + b.value().rows(), a.value().cols());
  out.topRows(a.value().rows()) = a.value();
  out.bottomRows(b.value().rows()) = b.value();
  Eigen::Index na = a.value().rows();
  return Var(&t, t.push(std::move(out), ia, ib, [ia, ib, na](Tape& tp, int id) {
               const Matrix& g = tp.grad(id);
               tp.grad(ia) += g.topRows(na);
               tp.grad(ib) += g.bottomRows(g.rows() - na);
             }));
}

/// Row block [r0, r0+n).
inline Var rows(const Var& a, Eigen::Index r0, Eigen::Index n) {
  Tape& t = *a.tape();
  int ia = a.id();
  return Var(&t, t.push(a.value().middleRows(r0, n), ia, -1,
                        [ia, r0, n](Tape& tp, int id) {
                          tp.grad(ia).middleRows(r0, n) += tp.grad(id);
                        }));
}

inline Var relu(const Var& a) {
  Tape& t = *a.tape();
  int ia = a.id();
  // Subgradient at 0 is 0: only strictly positive outputs pass gradient.
  return Var(&t, t.push(a.value().cwiseMax(0.0), ia, -1, [ia](Tape& tp, int id) {
               const Matrix& v = tp.node(id).value;
               tp.grad(ia) += tp.grad(id).cwiseProduct(
                   (v.array() > 0.0).cast<Scalar>().matrix());
             }));
}

inline Var sigmoid(const Var& a) {
  Tape& t = *a.tape();
  int ia = a.id();
  Matrix out = a.value().unaryExpr([](Scalar x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  return Var(&t, t.push(std::move(out), ia, -1, [ia](Tape& tp, int id) {
               const Matrix& s = tp.node(id).value;
               tp.grad(ia) += tp.grad(id).cwiseProduct(
                   s.cwiseProduct(Matrix::Ones(s.rows(), s.cols()) - s));
             }));
}

inline Var tanh_v(const Var& a) {
  Tape& t = *a.tape();
  int ia = a.id();
  return Var(&t, t.push(a.value().array().tanh().matrix(), ia, -1,
                        [ia](Tape& tp, int id) {
                          const Matrix& v = tp.node(id).value;
                          tp.grad(ia) += tp.grad(id).cwiseProduct(
                              (1.0 - v.array().square()).matrix());
                        }));
}

/// Max over column blocks of fixed width: input (F x P*B) -> output (F x B),
/// column j maximizing over columns [j*P, (j+1)*P). Ties break to the lowest
/// column so gradients are deterministic.
inline Var colblock_max(const Var& a, Eigen::Index block) {
  Tape& t = *a.tape();
  int ia = a.id();
  const Matrix& v = a.value();
  Eigen::Index nblocks = v.cols() / block;
  Matrix out(v.rows(), nblocks);
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(v.rows() * nblocks));
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    for (Eigen::Index f = 0; f < v.rows(); ++f) {
      Eigen::Index best = j * block;
      Scalar best_v = v(f, best);
      for (Eigen::Index p = 1; p < block; ++p) {
        if (v(f, j * block + p) > best_v) {
          best_v = v(f, j * block + p);
          best = j * block + p;
        }
      }
      out(f, j) = best_v;
      argmax[static_cast<std::size_t>(j * v.rows() + f)] = best;
    }
  }
  return Var(&t, t.push(std::move(out), ia, -1,
                        [ia, block, argmax = std::move(argmax)](Tape& tp, int id) {
                          const Matrix& g = tp.grad(id);
                          Matrix& gi = tp.grad(ia);
                          for (Eigen::Index j = 0; j < g.cols(); ++j)
                            for (Eigen::Index f = 0; f < g.rows(); ++f)
                              gi(f, argmax[static_cast<std::size_t>(j * g.rows() + f)]) +=
                                  g(f, j);
                        }));
}

/// Row-wise max of the whole matrix: (F x P) -> (F x 1).
inline Var rowwise_max(const Var& a) { return colblock_max(a, a.value().cols()); }

/// Numerically safe log-softmax down each column.
inline Var log_softmax_cols(const Var& a) {
  Tape& t = *a.tape();
  int ia = a.id();
  const Matrix& v = a.value();
  Matrix out(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Scalar m = v.col(j).maxCoeff();
    Vector sh = v.col(j).array() - m;
    Scalar lse = std::log(sh.array().exp().sum());
    out.col(j) = sh.array() - lse;
  }
  return Var(&t, t.push(std::move(out), ia, -1, [ia](Tape& tp, int id) {
               const Matrix& lsm = tp.node(id).value;
               const Matrix& g = tp.grad(id);
               Matrix& gi = tp.grad(ia);
               for (Eigen::Index j = 0; j < g.cols(); ++j) {
                 Scalar gsum = g.col(j).sum();
                 gi.col(j) += g.col(j) - gsum * lsm.col(j).array().exp().matrix();
               }
             }));
}

/// Select one entry per column: (V x B) with indices[B] -> (1 x B).
inline Var pick_per_col(const Var& a, std::vector<int> idx) {
  Tape& t = *a.tape();
  int ia = a.id();
  const Matrix& v = a.value();
  Matrix out(1, v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    out(0, j) = v(idx[static_cast<std::size_t>(j)], j);
  return Var(&t, t.push(std::move(out), ia, -1,
                        [ia, idx = std::move(idx)](Tape& tp, int id) {
                          const Matrix& g = tp.grad(id);
                          Matrix& gi = tp.grad(ia);
                          for (Eigen::Index j = 0; j < g.cols(); ++j)
                            gi(idx[static_cast<std::size_t>(j)], j) += g(0, j);
                        }));
}

/// Gather columns (with repetition): (E x V) with indices[B] -> (E x B).
inline Var gather_cols(const Var& a, std::vector<int> idx) {
  Tape& t = *a.tape();
  int ia = a.id();
  const Matrix& v = a.value();
  Matrix out(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = v.col(idx[j]);
  return Var(&t, t.push(std::move(out), ia, -1,
                        [ia, idx = std::move(idx)](Tape& tp, int id) {
                          const Matrix& g = tp.grad(id);
                          Matrix& gi = tp.grad(ia);
                          for (std::size_t j = 0; j < idx.size(); ++j)
                            gi.col(idx[j]) += g.col(static_cast<Eigen::Index>(j));
                        }));
}

inline Var sum_all(const Var& a) {
  Tape& t = *a.tape();
  int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return Var(&t, t.push(std::move(out), ia, -1, [ia](Tape& tp, int id) {
               tp.grad(ia).array() += tp.grad(id)(0, 0);
             }));
}

/// Re-enter a value as a constant, cutting its gradient path.
inline Var detach(const Var& a) { return constant(*a.tape(), a.value()); }

}  // namespace scoregan
