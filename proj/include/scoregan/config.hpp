#pragma once

#include "scoregan/common.hpp"
#include "scoregan/corpus.hpp"
#include "scoregan/discriminator.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scoregan {

struct AblationFlags {
  bool score_in_g = true;
  bool score_in_d = true;
  bool regularizer_on = true;
};

/// Everything a training run needs. Every key of the flat config file has a
/// default here; unknown keys are errors.
struct TrainConfig {
  std::uint64_t seed = 1;
  int threads = 1;

  // Data
  std::string dataset;          // JSONL path; empty -> synthetic corpus
  std::string embeddings_file;  // pretrained text embeddings; empty -> random
  RatingScheme rating = RatingScheme::FiveWay;
  Scalar supervision = 0.7;  // train fraction
  int min_freq = 1;
  int t_len = 32;

  // Synthetic corpus (used when dataset is empty)
  int synth_vocab = 200;
  int synth_size = 2000;
  Scalar synth_fraud_fraction = 0.3;
  Scalar synth_rho = 0.8;
  Scalar synth_bot_fraction = 0.0;
  int synth_min_tokens = 8;
  int synth_max_tokens = 24;

  // Generator
  int gen_embed_dim = 32;
  int gen_hidden_dim = 32;
  int noise_dim = 16;
  int score_embed_dim = 8;
  Scalar gamma = 1e-2;      // policy-gradient rate; 1 is the full-strength step
  Scalar lr_gen_mle = 0.1;  // MLE pretraining rate
  int batch_gen = 50;
  int pretrain_gen_epochs = 100;

  // Discriminators
  std::vector<int> disc_windows = {1, 2, 3};
  std::vector<int> disc_filters = {16, 16, 16};
  int embed_dim = 50;  // word-embedding dimension
  Scalar lr_disc = 1e-4;
  int batch_disc = 64;
  int pretrain_disc_steps = 50;
  int disc_steps_per_epoch = 8;
  // mnr/rl/se/sr concatenation; the score flag here is unused (the ablation
  // switch score_in_d drives it when discriminators are built).
  FeatureFlags behavioral{false, false, false, false, false};

  // Adversarial loop
  int outer_iters = 120;
  int gen_inner = 5;    // IT
  int disc_inner = 3;   // IT'
  int rollouts = 16;    // N
  Scalar lambda = 1.0;  // regularizer weight
  int igm_batch = 16;
  int fb_pool = 128;  // generated negatives refreshed per discriminator epoch
  AblationFlags ablation;
  bool reward_baseline = true;
  bool augment_with_generated = true;
  bool early_stop = false;
  int patience = 10;
  Scalar auc_target = 0.85;  // convergence threshold for reports
  int checkpoint_every = 0;  // 0 = only final

  int categories() const { return category_count(rating); }
};

/// Parse the flat key = value run-config format. Unknown keys throw
/// ConfigError naming the key; missing keys keep their defaults.
TrainConfig parse_config_file(const std::string& path);
TrainConfig parse_config_text(const std::string& text);

/// Apply one key = value assignment (shared by the file parser and CLI
/// overrides).
void apply_config_kv(TrainConfig& config, const std::string& key, const std::string& value);

/// Canonical JSON snapshot, embedded in checkpoints and report metadata.
nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

}  // namespace scoregan
