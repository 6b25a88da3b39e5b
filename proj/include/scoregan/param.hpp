#pragma once

#include "scoregan/common.hpp"
#include "scoregan/rng.hpp"

#include <map>
#include <string>

namespace scoregan {

/// One named dense tensor with a same-shape gradient slot.
struct Parameter {
  Matrix value;
  Matrix grad;

  explicit Parameter(Matrix v)
      : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
  Parameter() = default;
};

enum class StepDirection { Ascend, Descend };

/// Named collection of parameters. Iteration order is the lexicographic name
/// order, which keeps checkpoints and gradient sweeps deterministic.
class ParamSet {
 public:
  Parameter& add(const std::string& name, Matrix value) {
    auto [it, inserted] = entries_.emplace(name, Parameter(std::move(value)));
    if (!inserted) throw UsageError("parameter already exists: " + name);
    return it->second;
  }

  Parameter& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw UsageError("no such parameter: " + name);
    return it->second;
  }
  const Parameter& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw UsageError("no such parameter: " + name);
    return it->second;
  }
  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  void zero_grads() {
    for (auto& [name, p] : entries_) p.grad.setZero();
    grads_populated_ = false;
  }

  void mark_grads_populated() { grads_populated_ = true; }
  bool grads_populated() const { return grads_populated_; }

  std::size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Parameter> entries_;
  bool grads_populated_ = false;
};

/// Plain gradient step: p <- p +/- rate * grad(p), then grads are zeroed.
/// Requires a prior backward pass to have populated the grads.
inline void grad_step(ParamSet& params, Scalar rate, StepDirection direction) {
  if (rate < 0) throw ArgumentError("grad_step: rate must be nonnegative");
  if (!params.grads_populated()) {
    throw UsageError("grad_step: gradients have not been populated");
  }
  Scalar sign = direction == StepDirection::Ascend ? 1.0 : -1.0;
  for (auto& [name, p] : params) {
    p.value += (sign * rate) * p.grad;
    require_finite(p.value, "parameter after grad_step");
  }
  params.zero_grads();
}

}  // namespace scoregan
