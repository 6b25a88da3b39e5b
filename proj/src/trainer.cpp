#include "scoregan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace scoregan {

namespace {

int first_end_position(const TokenSeq& seq) {
  for (int t = 0; t < seq.length(); ++t) {
    if (seq.ids[static_cast<std::size_t>(t)] == Vocab::kEndId) return t;
  }
  return seq.length();
}

/// Runs tasks [0, n) with a fixed result slot each; identical output for any
/// thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& task) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += threads) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

BehavioralVector bot_features(const TokenSeq& seq, int score_category, RatingScheme scheme) {
  BehavioralVector v;
  v.mnr = 0.0;
  v.rl = static_cast<Scalar>(std::max(1, first_end_position(seq)));
  int score = category_to_score(score_category, scheme);
  v.se = (scheme == RatingScheme::FiveWay) ? (score <= 3 ? 1 : 0) : (score == -1 ? 1 : 0);
  v.sr = 1;
  return v;
}

Scalar mc_reward(const GeneratorModel& gen, const DiscriminatorModel& df,
                 const DiscriminatorModel& dg, const EmbeddingTable& embeddings,
                 const TokenSeq& prefix, int score_category, int n, Rng& rng) {
  if (n < 1) throw ArgumentError("mc_reward: rollout count must be >= 1");
  const int t = prefix.true_length;
  const int t_len = gen.config.t_len;
  if (t < 1) throw UsageError("mc_reward: no action taken yet");
  if (t > t_len) throw UsageError("mc_reward: prefix longer than T");

  RatingScheme scheme = df.config.scheme;
  auto disc_sum = [&](const std::vector<TokenSeq>& seqs) {
    std::vector<DiscInput> inputs(seqs.size());
    std::vector<BehavioralVector> feats(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      feats[i] = bot_features(seqs[i], score_category, scheme);
      inputs[i].seq = &seqs[i];
      inputs[i].score_category = score_category;
      inputs[i].features = feats[i];
    }
    Vector from_df = positive_prob_batch(df, inputs, embeddings);
    Vector from_dg = positive_prob_batch(dg, inputs, embeddings);
    return std::make_pair(from_df, from_dg);
  };

  bool terminal = t == t_len || prefix.ids[static_cast<std::size_t>(t - 1)] == Vocab::kEndId;
  if (terminal) {
    // Complete sequence: D_f + D_g directly, no rollouts.
    auto [from_df, from_dg] = disc_sum({prefix});
    return from_df[0] + from_dg[0];
  }

  std::vector<SampledSequence> completions = rollout_complete(gen, prefix, score_category, n, rng);
  std::vector<TokenSeq> seqs(completions.size());
  for (std::size_t i = 0; i < completions.size(); ++i) seqs[i] = completions[i].seq;
  auto [from_df, from_dg] = disc_sum(seqs);

  // Kahan-compensated mean over rollouts.
  Scalar sum = 0.0, comp = 0.0;
  for (int j = 0; j < n; ++j) {
    Scalar term = from_df[j] + from_dg[j] - comp;
    Scalar next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum / static_cast<Scalar>(n);
}

// ---------------------------------------------------------------------------
// Training orchestration
// ---------------------------------------------------------------------------

namespace {

struct EncodedReview {
  TokenSeq seq;
  int category = 0;
  BehavioralVector features;
};

DiscInput as_input(const EncodedReview& r) {
  DiscInput in;
  in.seq = &r.seq;
  in.score_category = r.category;
  in.features = r.features;
  return in;
}

std::vector<const EncodedReview*> draw_batch(const std::vector<EncodedReview>& from,
                                             int count, Rng& rng) {
  std::vector<const EncodedReview*> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(&from[rng.uniform_int(from.size())]);
  }
  return out;
}

std::vector<DiscInput> to_inputs(const std::vector<const EncodedReview*>& batch) {
  std::vector<DiscInput> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = as_input(*batch[i]);
  return out;
}

struct BotPool {
  std::vector<SampledSequence> samples;
  std::vector<BehavioralVector> features;

  DiscInput input(std::size_t i) const {
    DiscInput in;
    in.seq = &samples[i].seq;
    in.score_category = samples[i].score_category;
    in.features = features[i];
    return in;
  }
};

BotPool make_pool(const GeneratorModel& gen, RatingScheme scheme, int count, Rng& rng) {
  std::vector<int> cats(static_cast<std::size_t>(count));
  for (int& c : cats) c = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(gen.config.categories)));
  BotPool pool;
  pool.samples = sample_with_scores(gen, cats, rng);
  pool.features.resize(pool.samples.size());
  for (std::size_t i = 0; i < pool.samples.size(); ++i) {
    pool.features[i] = bot_features(pool.samples[i].seq, pool.samples[i].score_category, scheme);
  }
  return pool;
}

}  // namespace

std::vector<RankedPrediction> score_reviews(const DiscriminatorModel& dg,
                                            const EmbeddingTable& embeddings,
                                            const Vocab& vocab,
                                            const std::vector<Review>& reviews,
                                            RatingScheme scheme, int t_len) {
  std::vector<TokenSeq> seqs(reviews.size());
  auto behavioral = extract_behavioral(reviews, scheme);
  std::vector<DiscInput> inputs(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    seqs[i] = encode(reviews[i], vocab, t_len);
    inputs[i].seq = &seqs[i];
    inputs[i].score_category = score_category(reviews[i].score, scheme);
    inputs[i].features = behavioral.at(reviews[i].review_id);
  }
  Vector probs = positive_prob_batch(dg, inputs, embeddings);
  std::vector<RankedPrediction> preds(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    preds[i].score = probs[static_cast<Eigen::Index>(i)];
    preds[i].fraud = is_fraud(reviews[i].label);
  }
  return preds;
}

void save_training_checkpoint(TrainedModels& models, const TrainConfig& config,
                              int iteration, const std::string& path) {
  std::map<std::string, Matrix*> tensors;
  collect_params(tensors, models.gen->params, "gen/");
  collect_params(tensors, models.df->params, "df/");
  collect_params(tensors, models.dg->params, "dg/");
  tensors.emplace("embeddings", &models.embeddings.vectors);

  nlohmann::json meta;
  meta["format"] = "scoregan-checkpoint";
  meta["config"] = config_to_json(config);
  meta["iteration"] = iteration;
  meta["vocab"] = models.vocab.tokens();
  meta["dg_mnr_max"] = models.dg->config.mnr_max;
  meta["dg_rl_max"] = models.dg->config.rl_max;
  save_checkpoint(std::move(tensors), meta, path);
}

namespace {

GeneratorConfig make_gen_config(const TrainConfig& c, int vocab_size) {
  GeneratorConfig g;
  g.vocab_size = vocab_size;
  g.embed_dim = c.gen_embed_dim;
  g.hidden_dim = c.gen_hidden_dim;
  g.noise_dim = c.noise_dim;
  g.score_embed_dim = c.score_embed_dim;
  g.categories = c.categories();
  g.t_len = c.t_len;
  g.score_in_g = c.ablation.score_in_g;
  return g;
}

DiscConfig make_disc_config(const TrainConfig& c, DiscKind kind, Scalar mnr_max, Scalar rl_max) {
  DiscConfig d;
  d.kind = kind;
  d.window_sizes = c.disc_windows;
  d.filter_counts = c.disc_filters;
  if (d.filter_counts.size() == 1 && d.window_sizes.size() > 1) {
    d.filter_counts.assign(d.window_sizes.size(), d.filter_counts[0]);
  }
  d.embed_dim = c.embed_dim;
  d.t_len = c.t_len;
  d.categories = c.categories();
  d.scheme = c.rating;
  d.features.score = c.ablation.score_in_d;
  if (kind == DiscKind::Dg) {
    d.features.mnr = c.behavioral.mnr;
    d.features.rl = c.behavioral.rl;
    d.features.se = c.behavioral.se;
    d.features.sr = c.behavioral.sr;
  } else {
    d.features.mnr = d.features.rl = d.features.se = d.features.sr = false;
  }
  d.mnr_max = mnr_max;
  d.rl_max = rl_max;
  return d;
}

}  // namespace

TrainedModels models_from_checkpoint(const Checkpoint& ckpt, TrainConfig* config_out,
                                     int* iteration_out) {
  if (!ckpt.meta.contains("config") || !ckpt.meta.contains("vocab")) {
    throw CheckpointError("checkpoint metadata is missing config or vocab");
  }
  TrainConfig config = config_from_json(ckpt.meta.at("config"));
  TrainedModels models;
  models.vocab = Vocab::from_tokens(ckpt.meta.at("vocab").get<std::vector<std::string>>());

  auto it = ckpt.tensors.find("embeddings");
  if (it == ckpt.tensors.end()) throw CheckpointError("checkpoint is missing tensor: embeddings");
  models.embeddings.vectors = it->second;

  Scalar mnr_max = ckpt.meta.value("dg_mnr_max", 1.0);
  Scalar rl_max = ckpt.meta.value("dg_rl_max", 1.0);
  models.gen = std::make_unique<GeneratorModel>(make_gen_config(config, models.vocab.size()), 0);
  models.df = std::make_unique<DiscriminatorModel>(
      make_disc_config(config, DiscKind::Df, mnr_max, rl_max), 0);
  models.dg = std::make_unique<DiscriminatorModel>(
      make_disc_config(config, DiscKind::Dg, mnr_max, rl_max), 0);
  restore_params(ckpt, models.gen->params, "gen/");
  restore_params(ckpt, models.df->params, "df/");
  restore_params(ckpt, models.dg->params, "dg/");
  if (config_out) *config_out = config;
  if (iteration_out) *iteration_out = ckpt.meta.value("iteration", 0);
  return models;
}

TrainResult adversarial_train(const TrainConfig& config_in, const std::vector<Review>& corpus,
                              const Checkpoint* resume, const MetricsSink& sink,
                              const std::string& checkpoint_path) {
  TrainConfig config = config_in;
  if (resume) {
    // The checkpoint's config snapshot is authoritative for a resumed run.
    config = config_from_json(resume->meta.at("config"));
    config.outer_iters = config_in.outer_iters;
  }
  if (config.outer_iters < 0) throw ConfigError("outer_iters must be >= 0");

  Rng root(config.seed);

  auto [train, test] = split_corpus(corpus, config.supervision, root.fork("split").seed());

  std::vector<Review> train_fh, train_g;
  for (const Review& r : train) (is_fraud(r.label) ? train_fh : train_g).push_back(r);
  if (train_fh.empty()) throw DataError("adversarial_train: no fraud examples in training split");
  if (train_g.empty()) throw DataError("adversarial_train: no genuine examples in training split");

  TrainResult result;
  int start_iter = 1;

  // Feature statistics come from the training split only; metric evaluation
  // recomputes features over whatever set it scores.
  auto behavioral = extract_behavioral(train, config.rating);
  Scalar mnr_max = 1.0, rl_max = 1.0;
  for (const Review& r : train) {
    const BehavioralVector& v = behavioral.at(r.review_id);
    mnr_max = std::max(mnr_max, v.mnr);
    rl_max = std::max(rl_max, v.rl);
  }

  if (resume) {
    int saved_iter = 0;
    result.models = models_from_checkpoint(*resume, nullptr, &saved_iter);
    start_iter = saved_iter + 1;
  } else {
    result.models.vocab = Vocab::build(train, config.min_freq);
    result.models.embeddings =
        config.embeddings_file.empty()
            ? random_embeddings(result.models.vocab, config.embed_dim, root.fork("emb").seed())
            : load_embeddings(config.embeddings_file, result.models.vocab, config.embed_dim,
                              root.fork("emb").seed());
    result.models.gen = std::make_unique<GeneratorModel>(
        make_gen_config(config, result.models.vocab.size()), root.fork("gen-init").seed());
    result.models.df = std::make_unique<DiscriminatorModel>(
        make_disc_config(config, DiscKind::Df, mnr_max, rl_max), root.fork("df-init").seed());
    result.models.dg = std::make_unique<DiscriminatorModel>(
        make_disc_config(config, DiscKind::Dg, mnr_max, rl_max), root.fork("dg-init").seed());
  }

  GeneratorModel& gen = *result.models.gen;
  DiscriminatorModel& df = *result.models.df;
  DiscriminatorModel& dg = *result.models.dg;
  const Vocab& vocab = result.models.vocab;
  const EmbeddingTable& emb = result.models.embeddings;
  const RatingScheme scheme = config.rating;
  const int t_len = config.t_len;

  auto encode_reviews = [&](const std::vector<Review>& reviews) {
    std::vector<EncodedReview> out(reviews.size());
    for (std::size_t i = 0; i < reviews.size(); ++i) {
      out[i].seq = encode(reviews[i], vocab, t_len);
      out[i].category = score_category(reviews[i].score, scheme);
      out[i].features = behavioral.at(reviews[i].review_id);
    }
    return out;
  };
  std::vector<EncodedReview> enc_fh = encode_reviews(train_fh);
  std::vector<EncodedReview> enc_g = encode_reviews(train_g);

  auto emit_metrics = [&](int iteration) {
    std::vector<RankedPrediction> preds =
        score_reviews(dg, emb, vocab, test, scheme, t_len);
    MetricsReport report;
    report.iteration = iteration;
    report.ap = average_precision(preds);
    report.auc = auc(preds);
    report.accuracy = accuracy(preds);
    for (const RankedPrediction& p : preds) (p.fraud ? report.n_pos : report.n_neg) += 1;
    report.seed = config.seed;
    report.supervision = config.supervision;
    report.ablation = config.ablation;
    result.history.push_back(report);
    if (sink) sink(report);
  };

  const int half_batch = std::max(1, config.batch_disc / 2);

  auto df_step = [&](const BotPool& pool, Rng& rng) {
    auto pos = to_inputs(draw_batch(enc_fh, half_batch, rng));
    std::vector<DiscInput> neg;
    neg.reserve(static_cast<std::size_t>(half_batch));
    for (int i = 0; i < half_batch; ++i) neg.push_back(pool.input(rng.uniform_int(pool.samples.size())));
    train_df_step(df, pos, neg, emb, config.lr_disc);
  };

  auto dg_step = [&](const BotPool& pool, Rng& rng, bool with_igm, Rng igm_rng) {
    auto pos = to_inputs(draw_batch(enc_g, half_batch, rng));
    std::vector<DiscInput> neg;
    neg.reserve(static_cast<std::size_t>(half_batch));
    for (int i = 0; i < half_batch; ++i) {
      // Negatives: human fraud, mixed with generated fraud when augmenting.
      bool from_pool = config.augment_with_generated && !pool.samples.empty() &&
                       rng.uniform() < 0.5;
      if (from_pool) {
        neg.push_back(pool.input(rng.uniform_int(pool.samples.size())));
      } else {
        neg.push_back(as_input(*draw_batch(enc_fh, 1, rng)[0]));
      }
    }
    Tape tape;
    if (with_igm) {
      IgmEstimate est = igm_regularizer_estimate(tape, gen, df, emb, config.igm_batch, igm_rng,
                                                 config.reward_baseline);
      train_dg_step(dg, pos, neg, emb, tape, est.value, config.lambda, config.lr_disc);
      // The regularizer's backward pass left lambda-scaled gradients in the
      // Q head and the generator surrogate; apply them with their own rates.
      grad_step(df.params, config.lr_disc, StepDirection::Ascend);
      grad_step(gen.params, config.gamma, StepDirection::Ascend);
    } else {
      train_dg_step(dg, pos, neg, emb, tape, std::nullopt, config.lambda, config.lr_disc);
    }
  };

  if (!resume) {
    // Pre-training: MLE for the generator on human fraud, then both
    // discriminators with an initial generated pool.
    std::vector<std::pair<TokenSeq, int>> mle_data;
    mle_data.reserve(enc_fh.size());
    for (const EncodedReview& r : enc_fh) mle_data.emplace_back(r.seq, r.category);
    Rng mle_rng = root.fork("mle");
    mle_pretrain(gen, mle_data, config.pretrain_gen_epochs, config.lr_gen_mle,
                 config.batch_gen, mle_rng);

    Rng pre_rng = root.fork("pretrain");
    BotPool pool = make_pool(gen, scheme, config.fb_pool, pre_rng);
    for (int s = 0; s < config.pretrain_disc_steps; ++s) {
      Rng srng = pre_rng.fork(static_cast<std::uint64_t>(s + 1));
      df_step(pool, srng);
      dg_step(pool, srng, false, Rng(0));
    }
    emit_metrics(0);
  }

  Scalar best_auc = -1.0;
  int since_best = 0;

  for (int it = start_iter; it <= config.outer_iters; ++it) {
    Rng iter_rng = root.fork("iter").fork(static_cast<std::uint64_t>(it));

    // Generator phase: IT policy-gradient steps with per-word rollout rewards.
    for (int g = 1; g <= config.gen_inner; ++g) {
      Rng grng = iter_rng.fork("gen").fork(static_cast<std::uint64_t>(g));
      std::vector<int> cats(static_cast<std::size_t>(config.batch_gen));
      for (int& c : cats) c = static_cast<int>(grng.uniform_int(static_cast<std::uint64_t>(gen.config.categories)));
      std::vector<SampledSequence> samples = sample_with_scores(gen, cats, grng);

      struct RewardTask {
        int sample_idx;
        int prefix_len;
      };
      std::vector<RewardTask> tasks;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        for (int t = 1; t <= samples[i].seq.true_length; ++t) {
          tasks.push_back({static_cast<int>(i), t});
        }
      }
      std::vector<Scalar> task_rewards(tasks.size(), 0.0);
      Rng mc_base = grng.fork("mc");
      parallel_for(static_cast<int>(tasks.size()), config.threads, [&](int k) {
        const RewardTask& task = tasks[static_cast<std::size_t>(k)];
        const SampledSequence& s = samples[static_cast<std::size_t>(task.sample_idx)];
        TokenSeq prefix;
        prefix.ids.assign(static_cast<std::size_t>(t_len), Vocab::kEndId);
        for (int t = 0; t < task.prefix_len; ++t) prefix.ids[static_cast<std::size_t>(t)] = s.seq.ids[static_cast<std::size_t>(t)];
        prefix.true_length = task.prefix_len;
        Rng task_rng = mc_base.fork(static_cast<std::uint64_t>(k));
        task_rewards[static_cast<std::size_t>(k)] =
            mc_reward(gen, df, dg, emb, prefix, s.score_category, config.rollouts, task_rng);
      });

      Scalar baseline = 0.0;
      if (config.reward_baseline && !tasks.empty()) {
        for (Scalar r : task_rewards) baseline += r;
        baseline /= static_cast<Scalar>(task_rewards.size());
      }

      std::vector<PolicyExample> batch(samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        batch[i].sample = samples[i];
        batch[i].rewards.assign(static_cast<std::size_t>(samples[i].seq.true_length), 0.0);
      }
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        batch[static_cast<std::size_t>(tasks[k].sample_idx)]
            .rewards[static_cast<std::size_t>(tasks[k].prefix_len - 1)] =
            task_rewards[k] - baseline;
      }
      policy_update(gen, batch, config.gamma);
    }

    // Discriminator phase: IT' epochs, each on a fresh generated pool.
    for (int d = 1; d <= config.disc_inner; ++d) {
      Rng drng = iter_rng.fork("disc").fork(static_cast<std::uint64_t>(d));
      Rng pool_rng = drng.fork("pool");
      BotPool pool = make_pool(gen, scheme, config.fb_pool, pool_rng);
      for (int s = 0; s < config.disc_steps_per_epoch; ++s) {
        Rng srng = drng.fork("step").fork(static_cast<std::uint64_t>(s));
        df_step(pool, srng);
        dg_step(pool, srng, config.ablation.regularizer_on,
                srng.fork("igm"));
      }
    }

    emit_metrics(it);

    if (!checkpoint_path.empty() && config.checkpoint_every > 0 &&
        it % config.checkpoint_every == 0 && it < config.outer_iters) {
      save_training_checkpoint(result.models, config, it,
                               checkpoint_path + ".iter" + std::to_string(it));
    }

    result.final_iteration = it;
    if (config.early_stop) {
      Scalar current = result.history.back().auc;
      if (current > best_auc + 1e-12) {
        best_auc = current;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    }
  }

  if (result.history.empty()) emit_metrics(start_iter - 1);
  return result;
}

}  // namespace scoregan
