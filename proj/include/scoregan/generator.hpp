#pragma once

#include "scoregan/common.hpp"
#include "scoregan/corpus.hpp"
#include "scoregan/rng.hpp"
#include "scoregan/tape.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace scoregan {

struct GeneratorConfig {
  int vocab_size = 0;
  int embed_dim = 32;
  int hidden_dim = 32;
  int noise_dim = 16;
  int score_embed_dim = 8;
  int categories = 5;  // C
  int t_len = 32;      // T
  bool score_in_g = true;
};

/// Score-conditioned LSTM sequence generator. The initial hidden and cell
/// states are projections of [noise ; score embedding]; each step emits a
/// softmax over the vocabulary and feeds the drawn token's embedding back in.
class GeneratorModel {
 public:
  GeneratorModel(GeneratorConfig config, std::uint64_t init_seed);

  GeneratorConfig config;
  ParamSet params;

  int init_input_dim() const {
    return config.noise_dim + (config.score_in_g ? config.score_embed_dim : 0);
  }
};

struct SampledSequence {
  TokenSeq seq;
  int score_category = 0;
  std::vector<Scalar> stepwise_logprob;  // one entry per drawn action
  Matrix noise;                          // noise_dim x 1 input that produced it
};

/// Draw sequences conditioned on one score category.
std::vector<SampledSequence> sample(const GeneratorModel& gen, int score_category,
                                    int n, Rng& rng);

/// Per-sequence score categories; consumed in batch order.
std::vector<SampledSequence> sample_with_scores(const GeneratorModel& gen,
                                                const std::vector<int>& categories,
                                                Rng& rng);

/// Complete a partial sequence n times with the generator's own policy.
/// Each completion draws fresh noise; prefix tokens are kept verbatim and
/// their log-probabilities are recorded alongside the sampled ones.
std::vector<SampledSequence> rollout_complete(const GeneratorModel& gen,
                                              const TokenSeq& prefix,
                                              int score_category, int n, Rng& rng);

/// Teacher-forced epochs of maximum-likelihood training. Returns the mean
/// negative log-likelihood per token for each epoch.
std::vector<Scalar> mle_pretrain(GeneratorModel& gen,
                                 const std::vector<std::pair<TokenSeq, int>>& data,
                                 int epochs, Scalar rate, int batch_size, Rng& rng);

struct PolicyExample {
  SampledSequence sample;
  std::vector<Scalar> rewards;  // size 1 (broadcast) or one per action
};

/// One REINFORCE ascent step on sum_i sum_t reward_{i,t} * log p(action_{i,t}).
void policy_update(GeneratorModel& gen, const std::vector<PolicyExample>& batch,
                   Scalar rate);

/// Taped weighted log-probability rows for a batch of sampled sequences:
/// output (1 x B), entry j = sum_t weights(t, j) * log p(action_{t,j}).
/// weights has max action count rows; entries beyond a sequence's length are
/// ignored. Shared by policy_update and the IGM regularizer estimate.
Var taped_sequence_logprob(Tape& tape, GeneratorModel& gen,
                           const std::vector<const SampledSequence*>& batch,
                           const Matrix& weights);

}  // namespace scoregan
