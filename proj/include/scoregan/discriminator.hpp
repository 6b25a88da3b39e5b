#pragma once

#include "scoregan/common.hpp"
#include "scoregan/corpus.hpp"
#include "scoregan/embedding.hpp"
#include "scoregan/rng.hpp"
#include "scoregan/tape.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scoregan {

enum class DiscKind { Dg, Df };

/// Scalars appended to the pooled text features for the P head. The score
/// flag mirrors the score-in-discriminator ablation switch; the rest are the
/// behavioral features.
struct FeatureFlags {
  bool score = true;
  bool mnr = false;
  bool rl = false;
  bool se = false;
  bool sr = false;

  int count() const {
    return (score ? 1 : 0) + (mnr ? 1 : 0) + (rl ? 1 : 0) + (se ? 1 : 0) + (sr ? 1 : 0);
  }
};

struct DiscConfig {
  DiscKind kind = DiscKind::Dg;
  std::vector<int> window_sizes = {1, 2, 3};
  std::vector<int> filter_counts = {16, 16, 16};  // one entry per window size
  int embed_dim = 50;
  int t_len = 32;
  int categories = 5;  // C, size of the Q head
  RatingScheme scheme = RatingScheme::FiveWay;
  FeatureFlags features;
  // Normalization bounds for the MNR and RL features, set from training data.
  Scalar mnr_max = 1.0;
  Scalar rl_max = 1.0;

  int pooled_dim() const {
    int total = 0;
    for (int f : filter_counts) total += f;
    return total;
  }
};

/// Convolutional text classifier. One kernel bank per window size, ReLU,
/// max-pool over positions, concatenation into a pooled vector f. The P head
/// reads f plus any enabled score/behavioral scalars; the Q head (Df only)
/// reads the text features alone, since it approximates the posterior of the
/// score given the generated text.
class DiscriminatorModel {
 public:
  DiscriminatorModel(DiscConfig config, std::uint64_t init_seed);

  DiscConfig config;
  ParamSet params;

  bool has_q_head() const { return config.kind == DiscKind::Df; }
};

struct DiscOutput {
  Vector p;  // label distribution, length 2
  Vector q;  // score distribution over C (Df only), empty for Dg
};

struct DiscInput {
  const TokenSeq* seq = nullptr;
  std::optional<int> score_category;
  std::optional<BehavioralVector> features;
};

/// Full pipeline of one review. Errors on shape/flag mismatches.
DiscOutput d_forward(const DiscriminatorModel& disc, const TokenSeq& seq,
                     const EmbeddingTable& embeddings,
                     std::optional<int> score_category = std::nullopt,
                     std::optional<BehavioralVector> features = std::nullopt);

/// Batched probability of class 1 (Dg: fraud, Df: human-written) on the fast
/// path; used for rollout rewards and metrics.
Vector positive_prob_batch(const DiscriminatorModel& disc,
                           const std::vector<DiscInput>& batch,
                           const EmbeddingTable& embeddings);

/// Taped forward for training: log-softmax outputs of both heads.
struct TapedDiscOutput {
  Var p_logsm;  // 2 x B
  Var q_logsm;  // C x B (Df only; unset for Dg)
  bool has_q = false;
};
TapedDiscOutput taped_d_forward(Tape& tape, DiscriminatorModel& disc,
                                const std::vector<DiscInput>& batch,
                                const EmbeddingTable& embeddings);

/// One ascent step on E_pos[log P(genuine)] + E_neg[log P(fraud)] + lambda *
/// igm_term. The igm term, when present, must live on `tape`; its backward
/// pass deposits gradients into whatever parameter sets it touches (the Q
/// head and the generator) without stepping them — the caller owns those
/// updates. Returns the objective value.
Scalar train_dg_step(DiscriminatorModel& dg, const std::vector<DiscInput>& pos_batch,
                     const std::vector<DiscInput>& neg_batch,
                     const EmbeddingTable& embeddings, Tape& tape,
                     std::optional<Var> igm_term, Scalar lambda, Scalar rate);

/// One descent step on cross-entropy of P (pos = human fraud, neg = generated)
/// plus, when enabled, cross-entropy of Q against each item's score category.
Scalar train_df_step(DiscriminatorModel& df, const std::vector<DiscInput>& pos_batch,
                     const std::vector<DiscInput>& neg_batch,
                     const EmbeddingTable& embeddings, Scalar rate,
                     bool with_q_loss = true);

}  // namespace scoregan
