#include "scoregan/igm.hpp"

#include <cmath>
#include <limits>

namespace scoregan {

namespace {

constexpr Scalar kDistTol = 1e-9;

void check_distribution(const Vector& p, const char* what) {
  if (p.size() == 0) throw ArgumentError(std::string(what) + ": empty distribution");
  if (!p.allFinite()) throw ArgumentError(std::string(what) + ": non-finite entries");
  if (p.minCoeff() < -kDistTol) throw ArgumentError(std::string(what) + ": negative mass");
  if (std::abs(p.sum() - 1.0) > kDistTol) {
    throw ArgumentError(std::string(what) + ": mass does not sum to 1");
  }
}

void check_joint(const Matrix& joint) {
  if (joint.rows() < 1 || joint.cols() < 1) throw ArgumentError("joint: empty");
  if (!joint.allFinite()) throw ArgumentError("joint: non-finite entries");
  if (joint.minCoeff() < -kDistTol) throw ArgumentError("joint: negative mass");
  if (std::abs(joint.sum() - 1.0) > kDistTol) throw ArgumentError("joint: mass does not sum to 1");
}

Scalar plogp(Scalar p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

Scalar entropy(const Vector& dist) {
  check_distribution(dist, "entropy");
  Scalar h = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) h -= plogp(dist[i]);
  return std::max<Scalar>(h, 0.0);
}

Scalar mutual_information(const Matrix& joint) {
  check_joint(joint);
  Vector pc = joint.rowwise().sum();
  Vector px = joint.colwise().sum().transpose();
  // H(C) - H(C|X), with H(C|X) = sum_x p(x) H(C | X = x).
  Scalar hc = 0.0;
  for (Eigen::Index c = 0; c < pc.size(); ++c) hc -= plogp(pc[c]);
  Scalar hc_given_x = 0.0;
  for (Eigen::Index x = 0; x < px.size(); ++x) {
    if (px[x] <= 0.0) continue;
    for (Eigen::Index c = 0; c < pc.size(); ++c) {
      Scalar cond = joint(c, x) / px[x];
      hc_given_x -= px[x] * plogp(cond);
    }
  }
  return std::max<Scalar>(hc - hc_given_x, 0.0);
}

Scalar variational_lower_bound(const Matrix& joint, const Matrix& q) {
  check_joint(joint);
  if (q.rows() != joint.rows() || q.cols() != joint.cols()) {
    throw ArgumentError("variational_lower_bound: q shape does not match joint");
  }
  for (Eigen::Index x = 0; x < q.cols(); ++x) check_distribution(q.col(x), "auxiliary q column");

  Vector pc = joint.rowwise().sum();
  Scalar hc = 0.0;
  for (Eigen::Index c = 0; c < pc.size(); ++c) hc -= plogp(pc[c]);

  Scalar expected_logq = 0.0;
  for (Eigen::Index x = 0; x < joint.cols(); ++x) {
    for (Eigen::Index c = 0; c < joint.rows(); ++c) {
      Scalar p = joint(c, x);
      if (p <= 0.0) continue;
      if (q(c, x) <= 0.0) return -std::numeric_limits<Scalar>::infinity();
      expected_logq += p * std::log(q(c, x));
    }
  }
  return expected_logq + hc;
}

std::pair<Scalar, Scalar> lemma_expectation_check(const Matrix& f, const Matrix& joint) {
  check_joint(joint);
  if (f.rows() != joint.rows() || f.cols() != joint.cols()) {
    throw ArgumentError("lemma_expectation_check: f shape does not match joint");
  }
  Scalar lhs = joint.cwiseProduct(f).sum();

  Vector py = joint.colwise().sum().transpose();
  Scalar rhs = 0.0;
  for (Eigen::Index y = 0; y < joint.cols(); ++y) {
    if (py[y] <= 0.0) continue;
    // E_{x'~X|y}[f(x', y)]
    Scalar inner = 0.0;
    for (Eigen::Index xp = 0; xp < joint.rows(); ++xp) {
      inner += (joint(xp, y) / py[y]) * f(xp, y);
    }
    rhs += py[y] * inner;
  }
  return {lhs, rhs};
}

IgmEstimate igm_regularizer_estimate(Tape& tape, GeneratorModel& gen,
                                     DiscriminatorModel& df,
                                     const EmbeddingTable& embeddings,
                                     int batch_size, Rng& rng,
                                     bool surrogate_baseline) {
  if (batch_size < 1) throw ArgumentError("igm_regularizer_estimate: batch size must be >= 1");
  if (!df.has_q_head()) throw ConfigError("igm_regularizer_estimate: discriminator has no Q head");
  if (gen.config.categories != df.config.categories) {
    throw ConfigError("igm_regularizer_estimate: C differs between generator and Df");
  }
  const int c_count = gen.config.categories;
  const Scalar ln_c = std::log(static_cast<Scalar>(c_count));

  // c ~ Uniform(C), x ~ G(z, c).
  std::vector<int> cats(static_cast<std::size_t>(batch_size));
  for (int& c : cats) c = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(c_count)));
  IgmEstimate est;
  est.samples = sample_with_scores(gen, cats, rng);

  // log Q(c | x) from the Df Q head; the text-only pooled features feed Q, so
  // the intended score never leaks into its input.
  std::vector<DiscInput> inputs(est.samples.size());
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    inputs[i].seq = &est.samples[i].seq;
    inputs[i].score_category = est.samples[i].score_category;
  }
  TapedDiscOutput dfo = taped_d_forward(tape, df, inputs, embeddings);
  Var logq_row = pick_per_col(dfo.q_logsm, cats);  // 1 x B

  // Score-function surrogate for the generator: reward_i = log Q(c_i|x_i) + ln C,
  // optionally centered by the batch mean for variance reduction.
  int t_max = 0;
  for (const SampledSequence& s : est.samples) t_max = std::max(t_max, s.seq.true_length);
  Scalar reward_mean = 0.0;
  if (surrogate_baseline) {
    reward_mean = logq_row.value().mean() + ln_c;
  }
  Matrix weights = Matrix::Zero(std::max(t_max, 1), batch_size);
  for (int j = 0; j < batch_size; ++j) {
    Scalar reward = logq_row.value()(0, j) + ln_c - reward_mean;
    for (int t = 0; t < est.samples[static_cast<std::size_t>(j)].seq.true_length; ++t) {
      weights(t, j) = reward;
    }
  }
  std::vector<const SampledSequence*> ptrs(est.samples.size());
  for (std::size_t i = 0; i < est.samples.size(); ++i) ptrs[i] = &est.samples[i];
  Var surrogate = sum_all(taped_sequence_logprob(tape, gen, ptrs, weights));

  // Value = mean log Q + ln C exactly; the batch-mean surrogate enters as a
  // zero-valued carrier so only its gradient survives.
  Var zero_carrier = scale(sub(surrogate, detach(surrogate)), 1.0 / batch_size);
  est.value = add(add(scale(sum_all(logq_row), 1.0 / batch_size), scalar_constant(tape, ln_c)),
                  zero_carrier);
  return est;
}

}  // namespace scoregan
