#include "scoregan/discriminator.hpp"

#include "scoregan/fastops.hpp"

#include <algorithm>
#include <cmath>

namespace scoregan {

namespace {

Scalar fan_in_bound(int fan_in) { return 1.0 / std::sqrt(static_cast<Scalar>(std::max(1, fan_in))); }

std::string conv_w_name(int u) { return "conv_w_u" + std::to_string(u); }
std::string conv_b_name(int u) { return "conv_b_u" + std::to_string(u); }

}  // namespace

DiscriminatorModel::DiscriminatorModel(DiscConfig cfg, std::uint64_t init_seed)
    : config(std::move(cfg)) {
  if (config.window_sizes.empty() ||
      config.window_sizes.size() != config.filter_counts.size()) {
    throw ConfigError("discriminator: window sizes and filter counts must align");
  }
  for (std::size_t i = 0; i < config.window_sizes.size(); ++i) {
    if (config.window_sizes[i] < 1 || config.window_sizes[i] > config.t_len) {
      throw ConfigError("discriminator: window size out of range");
    }
    if (config.filter_counts[i] < 1) throw ConfigError("discriminator: filter count must be >= 1");
  }
  if (config.embed_dim < 1) throw ConfigError("discriminator: embed dim must be >= 1");

  Rng rng(init_seed);
  for (std::size_t i = 0; i < config.window_sizes.size(); ++i) {
    int u = config.window_sizes[i];
    int f = config.filter_counts[i];
    Rng r = rng.fork("conv" + std::to_string(u));
    Scalar b = fan_in_bound(u * config.embed_dim);
    params.add(conv_w_name(u), uniform_matrix(r, f, u * config.embed_dim, -b, b));
    params.add(conv_b_name(u), Matrix::Zero(f, 1));
  }
  int p_in = config.pooled_dim() + config.features.count();
  Rng rp = rng.fork("phead");
  params.add("p_w", uniform_matrix(rp, 2, p_in, -fan_in_bound(p_in), fan_in_bound(p_in)));
  params.add("p_b", Matrix::Zero(2, 1));
  if (config.kind == DiscKind::Df) {
    int q_in = config.pooled_dim();
    Rng rq = rng.fork("qhead");
    params.add("q_w",
               uniform_matrix(rq, config.categories, q_in, -fan_in_bound(q_in), fan_in_bound(q_in)));
    params.add("q_b", Matrix::Zero(config.categories, 1));
  }
}

// ---------------------------------------------------------------------------
// Shared input preparation
// ---------------------------------------------------------------------------

namespace {

/// Window matrix for one window size over the whole batch: (u*E) x (P*B),
/// where P = T-u+1 positions per sequence.
Matrix im2col(const DiscConfig& cfg, const std::vector<DiscInput>& batch,
              const EmbeddingTable& emb, int u) {
  const int t_len = cfg.t_len;
  const int e = cfg.embed_dim;
  const int positions = t_len - u + 1;
  const int b = static_cast<int>(batch.size());
  Matrix out(u * e, static_cast<Eigen::Index>(positions) * b);
  for (int j = 0; j < b; ++j) {
    const TokenSeq& seq = *batch[static_cast<std::size_t>(j)].seq;
    if (seq.length() != t_len) {
      throw ConfigError("d_forward: sequence length does not match configured T");
    }
    for (int p = 0; p < positions; ++p) {
      for (int k = 0; k < u; ++k) {
        out.col(static_cast<Eigen::Index>(j) * positions + p).segment(k * e, e) =
            emb.vectors.row(seq.ids[static_cast<std::size_t>(p + k)]).transpose();
      }
    }
  }
  return out;
}

/// Normalized score/behavioral rows appended to the pooled vector, in the
/// fixed order: score, MNR, RL, SE, SR.
Matrix feature_rows(const DiscConfig& cfg, const std::vector<DiscInput>& batch) {
  const int b = static_cast<int>(batch.size());
  Matrix rows(cfg.features.count(), b);
  for (int j = 0; j < b; ++j) {
    const DiscInput& in = batch[static_cast<std::size_t>(j)];
    int r = 0;
    if (cfg.features.score) {
      if (!in.score_category.has_value()) {
        throw UsageError("d_forward: score required while the score flag is on");
      }
      int c = *in.score_category;
      if (c < 0 || c >= cfg.categories) throw ArgumentError("d_forward: score category out of range");
      rows(r++, j) = static_cast<Scalar>(c) / static_cast<Scalar>(cfg.categories - 1);
    }
    BehavioralVector bv = in.features.value_or(BehavioralVector{});
    if (cfg.features.mnr) rows(r++, j) = std::min<Scalar>(1.0, bv.mnr / std::max<Scalar>(1.0, cfg.mnr_max));
    if (cfg.features.rl) rows(r++, j) = std::min<Scalar>(1.0, bv.rl / std::max<Scalar>(1.0, cfg.rl_max));
    if (cfg.features.se) rows(r++, j) = static_cast<Scalar>(bv.se);
    if (cfg.features.sr) rows(r++, j) = static_cast<Scalar>(bv.sr);
  }
  return rows;
}

/// Fast pooled text features: (sum of filters) x B.
Matrix pooled_fast(const DiscriminatorModel& disc, const std::vector<DiscInput>& batch,
                   const EmbeddingTable& emb) {
  const DiscConfig& cfg = disc.config;
  if (emb.dim() != cfg.embed_dim) {
    throw ConfigError("d_forward: embedding dim does not match configured dim");
  }
  const int b = static_cast<int>(batch.size());
  Matrix pooled(cfg.pooled_dim(), b);
  int row0 = 0;
  for (std::size_t i = 0; i < cfg.window_sizes.size(); ++i) {
    int u = cfg.window_sizes[i];
    int f = cfg.filter_counts[i];
    int positions = cfg.t_len - u + 1;
    Matrix win = im2col(cfg, batch, emb, u);
    Matrix conv = ((disc.params.at(conv_w_name(u)).value * win).colwise() +
                   Eigen::Ref<const Vector>(disc.params.at(conv_b_name(u)).value.col(0)))
                      .cwiseMax(0.0);
    for (int j = 0; j < b; ++j) {
      pooled.block(row0, j, f, 1) =
          conv.middleCols(static_cast<Eigen::Index>(j) * positions, positions)
              .rowwise()
              .maxCoeff();
    }
    row0 += f;
  }
  return pooled;
}

}  // namespace

DiscOutput d_forward(const DiscriminatorModel& disc, const TokenSeq& seq,
                     const EmbeddingTable& embeddings, std::optional<int> score_category,
                     std::optional<BehavioralVector> features) {
  std::vector<DiscInput> batch{DiscInput{&seq, score_category, features}};
  Matrix f = pooled_fast(disc, batch, embeddings);
  Matrix fr = feature_rows(disc.config, batch);
  Matrix p_in(f.rows() + fr.rows(), 1);
  p_in.topRows(f.rows()) = f;
  if (fr.rows() > 0) p_in.bottomRows(fr.rows()) = fr;

  DiscOutput out;
  out.p = softmax(disc.params.at("p_w").value * p_in.col(0) +
                  disc.params.at("p_b").value.col(0));
  if (disc.has_q_head()) {
    out.q = softmax(disc.params.at("q_w").value * f.col(0) +
                    disc.params.at("q_b").value.col(0));
  }
  require_finite(out.p, "discriminator P head");
  return out;
}

Vector positive_prob_batch(const DiscriminatorModel& disc,
                           const std::vector<DiscInput>& batch,
                           const EmbeddingTable& embeddings) {
  if (batch.empty()) return Vector(0);
  Matrix f = pooled_fast(disc, batch, embeddings);
  Matrix fr = feature_rows(disc.config, batch);
  Matrix p_in(f.rows() + fr.rows(), f.cols());
  p_in.topRows(f.rows()) = f;
  if (fr.rows() > 0) p_in.bottomRows(fr.rows()) = fr;
  Matrix logits = (disc.params.at("p_w").value * p_in).colwise() +
                  Eigen::Ref<const Vector>(disc.params.at("p_b").value.col(0));
  Matrix probs = softmax_cols_value(logits);
  return probs.row(1).transpose();
}

// ---------------------------------------------------------------------------
// Taped path
// ---------------------------------------------------------------------------

TapedDiscOutput taped_d_forward(Tape& tape, DiscriminatorModel& disc,
                                const std::vector<DiscInput>& batch,
                                const EmbeddingTable& embeddings) {
  const DiscConfig& cfg = disc.config;
  if (embeddings.dim() != cfg.embed_dim) {
    throw ConfigError("d_forward: embedding dim does not match configured dim");
  }
  Var pooled;
  bool first = true;
  for (std::size_t i = 0; i < cfg.window_sizes.size(); ++i) {
    int u = cfg.window_sizes[i];
    int positions = cfg.t_len - u + 1;
    Var win = constant(tape, im2col(cfg, batch, embeddings, u));
    Var conv = relu(add_colvec(matmul(leaf(tape, disc.params, conv_w_name(u)), win),
                               leaf(tape, disc.params, conv_b_name(u))));
    Var block = colblock_max(conv, positions);
    pooled = first ? block : vcat(pooled, block);
    first = false;
  }
  Matrix fr = feature_rows(cfg, batch);
  Var p_in = fr.rows() > 0 ? vcat(pooled, constant(tape, fr)) : pooled;

  TapedDiscOutput out;
  out.p_logsm = log_softmax_cols(
      add_colvec(matmul(leaf(tape, disc.params, "p_w"), p_in), leaf(tape, disc.params, "p_b")));
  if (disc.has_q_head()) {
    out.q_logsm = log_softmax_cols(add_colvec(matmul(leaf(tape, disc.params, "q_w"), pooled),
                                              leaf(tape, disc.params, "q_b")));
    out.has_q = true;
  }
  return out;
}

namespace {

/// Mean log-probability of one class over a batch.
Var mean_class_logprob(const Var& logsm, int cls) {
  int b = static_cast<int>(logsm.value().cols());
  std::vector<int> targets(static_cast<std::size_t>(b), cls);
  return scale(sum_all(pick_per_col(logsm, targets)), 1.0 / b);
}

Var mean_category_logprob(const Var& logsm, const std::vector<DiscInput>& batch) {
  std::vector<int> targets;
  targets.reserve(batch.size());
  for (const DiscInput& in : batch) {
    if (!in.score_category.has_value()) {
      throw UsageError("train_df_step: every item must carry its score");
    }
    targets.push_back(*in.score_category);
  }
  return scale(sum_all(pick_per_col(logsm, targets)), 1.0 / static_cast<Scalar>(batch.size()));
}

}  // namespace

Scalar train_dg_step(DiscriminatorModel& dg, const std::vector<DiscInput>& pos_batch,
                     const std::vector<DiscInput>& neg_batch,
                     const EmbeddingTable& embeddings, Tape& tape,
                     std::optional<Var> igm_term, Scalar lambda, Scalar rate) {
  if (lambda < 0) throw ArgumentError("train_dg_step: lambda must be nonnegative");
  if (pos_batch.empty() || neg_batch.empty()) throw UsageError("train_dg_step: empty batch");
  TapedDiscOutput pos = taped_d_forward(tape, dg, pos_batch, embeddings);
  TapedDiscOutput neg = taped_d_forward(tape, dg, neg_batch, embeddings);
  // Class 0 = genuine, class 1 = fraud.
  Var objective = add(mean_class_logprob(pos.p_logsm, 0),
                      mean_class_logprob(neg.p_logsm, 1));
  if (igm_term.has_value()) {
    if (igm_term->tape() != &tape) throw UsageError("train_dg_step: igm term is on another tape");
    objective = add(objective, scale(*igm_term, lambda));
  }
  Scalar value = objective.scalar();
  tape.backward(objective);
  grad_step(dg.params, rate, StepDirection::Ascend);
  return value;
}

Scalar train_df_step(DiscriminatorModel& df, const std::vector<DiscInput>& pos_batch,
                     const std::vector<DiscInput>& neg_batch,
                     const EmbeddingTable& embeddings, Scalar rate, bool with_q_loss) {
  if (pos_batch.empty() || neg_batch.empty()) throw UsageError("train_df_step: empty batch");
  if (df.config.kind != DiscKind::Df) throw UsageError("train_df_step: model is not a Df");
  Tape tape;
  TapedDiscOutput pos = taped_d_forward(tape, df, pos_batch, embeddings);
  TapedDiscOutput neg = taped_d_forward(tape, df, neg_batch, embeddings);
  // Class 1 = human-written fraud, class 0 = generated.
  Var p_loss = scale(add(mean_class_logprob(pos.p_logsm, 1),
                         mean_class_logprob(neg.p_logsm, 0)),
                     -0.5);
  Var loss = p_loss;
  if (with_q_loss) {
    Var q_loss = scale(add(mean_category_logprob(pos.q_logsm, pos_batch),
                           mean_category_logprob(neg.q_logsm, neg_batch)),
                       -0.5);
    loss = add(p_loss, q_loss);
  }
  Scalar value = loss.scalar();
  tape.backward(loss);
  grad_step(df.params, rate, StepDirection::Descend);
  return value;
}

}  // namespace scoregan
