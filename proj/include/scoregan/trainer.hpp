#pragma once

#include "scoregan/checkpoint.hpp"
#include "scoregan/config.hpp"
#include "scoregan/corpus.hpp"
#include "scoregan/discriminator.hpp"
#include "scoregan/embedding.hpp"
#include "scoregan/generator.hpp"
#include "scoregan/igm.hpp"
#include "scoregan/metrics.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace scoregan {

struct MetricsReport {
  int iteration = 0;
  Scalar ap = 0.0;
  Scalar auc = 0.0;
  Scalar accuracy = 0.0;
  int n_pos = 0;
  int n_neg = 0;
  std::uint64_t seed = 0;
  Scalar supervision = 0.0;
  AblationFlags ablation;
};

struct TrainedModels {
  Vocab vocab;
  EmbeddingTable embeddings;
  std::unique_ptr<GeneratorModel> gen;
  std::unique_ptr<DiscriminatorModel> df;
  std::unique_ptr<DiscriminatorModel> dg;
};

struct TrainResult {
  TrainedModels models;
  std::vector<MetricsReport> history;
  int final_iteration = 0;
};

using MetricsSink = std::function<void(const MetricsReport&)>;

/// Monte-Carlo action value of a partial sequence (Eqs. 11-12): for a complete
/// prefix the sum of both discriminators' positive-class probabilities, else
/// the mean of that sum over n rollout completions. The rollout mean uses
/// compensated summation, so it is reproducible to 1e-12 for any completion
/// order.
Scalar mc_reward(const GeneratorModel& gen, const DiscriminatorModel& df,
                 const DiscriminatorModel& dg, const EmbeddingTable& embeddings,
                 const TokenSeq& prefix, int score_category, int n, Rng& rng);

/// Full training: generator MLE pre-training, discriminator pre-training on
/// an initial generated pool, then the adversarial loop with per-word rollout
/// rewards and the IGM-regularized discriminator objective. Deterministic per
/// config seed. One MetricsReport per outer iteration (plus the pre-training
/// report at iteration 0 on fresh runs).
TrainResult adversarial_train(const TrainConfig& config, const std::vector<Review>& corpus,
                              const Checkpoint* resume = nullptr,
                              const MetricsSink& sink = {},
                              const std::string& checkpoint_path = "");

/// Writes models + config + iteration to the archive format; quantizes live
/// tensors through float32 so saving commutes with resuming.
void save_training_checkpoint(TrainedModels& models, const TrainConfig& config,
                              int iteration, const std::string& path);

/// Rebuilds models from a loaded archive (config, vocab, tensors).
TrainedModels models_from_checkpoint(const Checkpoint& ckpt, TrainConfig* config_out = nullptr,
                                     int* iteration_out = nullptr);

/// Fraud probabilities of D_g over encoded reviews.
std::vector<RankedPrediction> score_reviews(const DiscriminatorModel& dg,
                                            const EmbeddingTable& embeddings,
                                            const Vocab& vocab,
                                            const std::vector<Review>& reviews,
                                            RatingScheme scheme, int t_len);

/// Behavioral defaults for a generated sequence: no user evidence, review
/// length from the non-END prefix.
BehavioralVector bot_features(const TokenSeq& seq, int score_category, RatingScheme scheme);

}  // namespace scoregan
