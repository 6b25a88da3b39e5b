#include "scoregan/generator.hpp"

#include "scoregan/fastops.hpp"

#include <algorithm>
#include <cmath>

namespace scoregan {

namespace {

Scalar fan_in_bound(int fan_in) { return 1.0 / std::sqrt(static_cast<Scalar>(std::max(1, fan_in))); }

}  // namespace

GeneratorModel::GeneratorModel(GeneratorConfig cfg, std::uint64_t init_seed)
    : config(cfg) {
  if (config.vocab_size < 2) throw ConfigError("generator: vocab size must be >= 2");
  if (config.t_len < 1) throw ConfigError("generator: T must be >= 1");
  if (config.categories < 2) throw ConfigError("generator: C must be >= 2");
  if (init_input_dim() < 1) {
    throw ConfigError("generator: noise_dim + score embedding must be nonempty");
  }
  Rng rng(init_seed);
  int e = config.embed_dim, h = config.hidden_dim, v = config.vocab_size;
  int d0 = init_input_dim();

  Rng r1 = rng.fork("embed");
  params.add("embed", uniform_matrix(r1, e, v, -0.1, 0.1));
  Rng r2 = rng.fork("lstm");
  Scalar bw = fan_in_bound(e + h);
  params.add("lstm_w", uniform_matrix(r2, 4 * h, e + h, -bw, bw));
  params.add("lstm_b", Matrix::Zero(4 * h, 1));
  Rng r3 = rng.fork("out");
  Scalar bo = fan_in_bound(h);
  params.add("out_w", uniform_matrix(r3, v, h, -bo, bo));
  params.add("out_b", Matrix::Zero(v, 1));
  Rng r4 = rng.fork("init");
  Scalar bi = fan_in_bound(d0);
  params.add("init_h_w", uniform_matrix(r4, h, d0, -bi, bi));
  params.add("init_h_b", Matrix::Zero(h, 1));
  params.add("init_c_w", uniform_matrix(r4, h, d0, -bi, bi));
  params.add("init_c_b", Matrix::Zero(h, 1));
  if (config.score_in_g) {
    Rng r5 = rng.fork("score");
    params.add("score_embed",
               uniform_matrix(r5, config.score_embed_dim, config.categories, -0.5, 0.5));
  }
}

// ---------------------------------------------------------------------------
// Fast (no-gradient) forward path used for sampling and rollouts.
// ---------------------------------------------------------------------------

namespace {

struct FastState {
  Matrix h;  // H x n
  Matrix c;  // H x n
};

Matrix init_input(const GeneratorModel& gen, const Matrix& z,
                  const std::vector<int>& cats) {
  int n = static_cast<int>(cats.size());
  if (!gen.config.score_in_g) return z;
  const Matrix& se = gen.params.at("score_embed").value;
  Matrix in(gen.init_input_dim(), n);
  for (int j = 0; j < n; ++j) {
    if (gen.config.noise_dim > 0) in.col(j).head(gen.config.noise_dim) = z.col(j);
    in.col(j).tail(gen.config.score_embed_dim) = se.col(cats[static_cast<std::size_t>(j)]);
  }
  return in;
}

FastState init_state(const GeneratorModel& gen, const Matrix& z,
                     const std::vector<int>& cats) {
  Matrix in = init_input(gen, z, cats);
  FastState s;
  s.h = ((gen.params.at("init_h_w").value * in).colwise() +
         Eigen::Ref<const Vector>(gen.params.at("init_h_b").value.col(0)))
            .array()
            .tanh();
  s.c = ((gen.params.at("init_c_w").value * in).colwise() +
         Eigen::Ref<const Vector>(gen.params.at("init_c_b").value.col(0)))
            .array()
            .tanh();
  return s;
}

void lstm_step(const GeneratorModel& gen, const Matrix& x, FastState& s) {
  int h = gen.config.hidden_dim;
  Matrix in(x.rows() + s.h.rows(), x.cols());
  in.topRows(x.rows()) = x;
  in.bottomRows(s.h.rows()) = s.h;
  Matrix gates = (gen.params.at("lstm_w").value * in).colwise() +
                 Eigen::Ref<const Vector>(gen.params.at("lstm_b").value.col(0));
  Matrix ig = sigmoid_value(gates.middleRows(0, h));
  Matrix fg = sigmoid_value(gates.middleRows(h, h));
  Matrix og = sigmoid_value(gates.middleRows(2 * h, h));
  Matrix gg = gates.middleRows(3 * h, h).array().tanh();
  s.c = fg.cwiseProduct(s.c) + ig.cwiseProduct(gg);
  s.h = og.cwiseProduct(s.c.array().tanh().matrix());
}

Matrix token_embeddings(const GeneratorModel& gen, const std::vector<int>& tokens) {
  const Matrix& emb = gen.params.at("embed").value;
  Matrix x(emb.rows(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t j = 0; j < tokens.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = emb.col(tokens[j]);
  return x;
}

std::vector<SampledSequence> run_sampler(const GeneratorModel& gen,
                                         const TokenSeq& prefix,
                                         const std::vector<int>& cats, Rng& rng) {
  const int n = static_cast<int>(cats.size());
  const int t_len = gen.config.t_len;
  const int zdim = gen.config.noise_dim;

  Matrix z(std::max(zdim, 0), n);
  for (int j = 0; j < n; ++j)
    for (int d = 0; d < zdim; ++d) z(d, j) = rng.normal();

  FastState state = init_state(gen, z, cats);

  std::vector<std::vector<int>> actions(static_cast<std::size_t>(n));
  std::vector<std::vector<Scalar>> logprobs(static_cast<std::size_t>(n));
  std::vector<bool> finished(static_cast<std::size_t>(n), false);
  std::vector<int> prev(static_cast<std::size_t>(n), Vocab::kEndId);

  const Matrix& out_w = gen.params.at("out_w").value;
  const Vector out_b = gen.params.at("out_b").value.col(0);

  for (int t = 0; t < t_len; ++t) {
    lstm_step(gen, token_embeddings(gen, prev), state);
    Matrix logits = (out_w * state.h).colwise() + out_b;
    Matrix lsm = log_softmax_cols_value(logits);
    bool any_active = false;
    for (int j = 0; j < n; ++j) {
      auto ju = static_cast<std::size_t>(j);
      if (finished[ju]) {
        prev[ju] = Vocab::kEndId;
        continue;
      }
      int a;
      if (t < prefix.true_length) {
        a = prefix.ids[static_cast<std::size_t>(t)];
      } else {
        Vector probs = lsm.col(j).array().exp();
        a = static_cast<int>(rng.categorical(probs));
      }
      actions[ju].push_back(a);
      logprobs[ju].push_back(lsm(a, j));
      if (a == Vocab::kEndId) {
        finished[ju] = true;
        prev[ju] = Vocab::kEndId;
      } else {
        prev[ju] = a;
        any_active = true;
      }
    }
    if (!any_active) break;
  }

  std::vector<SampledSequence> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    auto ju = static_cast<std::size_t>(j);
    SampledSequence s;
    s.score_category = cats[ju];
    s.seq.ids.assign(static_cast<std::size_t>(t_len), Vocab::kEndId);
    for (std::size_t k = 0; k < actions[ju].size(); ++k)
      s.seq.ids[k] = actions[ju][k];
    s.seq.true_length = static_cast<int>(actions[ju].size());
    s.stepwise_logprob = std::move(logprobs[ju]);
    s.noise = zdim > 0 ? Matrix(z.col(j)) : Matrix(0, 1);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<SampledSequence> sample_with_scores(const GeneratorModel& gen,
                                                const std::vector<int>& categories,
                                                Rng& rng) {
  if (categories.empty()) throw ArgumentError("sample: need at least one sequence");
  for (int c : categories) {
    if (c < 0 || c >= gen.config.categories) {
      throw ArgumentError("sample: score category out of range");
    }
  }
  TokenSeq empty;
  empty.ids.assign(static_cast<std::size_t>(gen.config.t_len), Vocab::kEndId);
  empty.true_length = 0;
  return run_sampler(gen, empty, categories, rng);
}

std::vector<SampledSequence> sample(const GeneratorModel& gen, int score_category,
                                    int n, Rng& rng) {
  if (n < 1) throw ArgumentError("sample: n must be >= 1");
  if (score_category < 0 || score_category >= gen.config.categories) {
    throw ArgumentError("sample: score category out of range");
  }
  return sample_with_scores(gen, std::vector<int>(static_cast<std::size_t>(n), score_category), rng);
}

std::vector<SampledSequence> rollout_complete(const GeneratorModel& gen,
                                              const TokenSeq& prefix,
                                              int score_category, int n, Rng& rng) {
  if (n < 1) throw ArgumentError("rollout_complete: n must be >= 1");
  if (score_category < 0 || score_category >= gen.config.categories) {
    throw ArgumentError("rollout_complete: score category out of range");
  }
  if (prefix.true_length >= gen.config.t_len) {
    throw UsageError("rollout_complete: prefix is already a complete sequence");
  }
  return run_sampler(gen, prefix,
                     std::vector<int>(static_cast<std::size_t>(n), score_category), rng);
}

// ---------------------------------------------------------------------------
// Taped (gradient) path: teacher-forced log-probabilities.
// ---------------------------------------------------------------------------

namespace {

struct TapedLeaves {
  Var embed, lstm_w, lstm_b, out_w, out_b, init_h_w, init_h_b, init_c_w, init_c_b;
  Var score_embed;
  bool has_score = false;
};

TapedLeaves bind_leaves(Tape& t, GeneratorModel& gen) {
  TapedLeaves l;
  l.embed = leaf(t, gen.params, "embed");
  l.lstm_w = leaf(t, gen.params, "lstm_w");
  l.lstm_b = leaf(t, gen.params, "lstm_b");
  l.out_w = leaf(t, gen.params, "out_w");
  l.out_b = leaf(t, gen.params, "out_b");
  l.init_h_w = leaf(t, gen.params, "init_h_w");
  l.init_h_b = leaf(t, gen.params, "init_h_b");
  l.init_c_w = leaf(t, gen.params, "init_c_w");
  l.init_c_b = leaf(t, gen.params, "init_c_b");
  if (gen.config.score_in_g) {
    l.score_embed = leaf(t, gen.params, "score_embed");
    l.has_score = true;
  }
  return l;
}

struct TapedState {
  Var h, c;
};

TapedState taped_init_state(Tape& t, const GeneratorModel& gen, const TapedLeaves& l,
                            const Matrix& z, const std::vector<int>& cats) {
  Var in;
  if (l.has_score) {
    Var sc = gather_cols(l.score_embed, cats);
    in = gen.config.noise_dim > 0 ? vcat(constant(t, z), sc) : sc;
  } else {
    in = constant(t, z);
  }
  TapedState s;
  s.h = tanh_v(add_colvec(matmul(l.init_h_w, in), l.init_h_b));
  s.c = tanh_v(add_colvec(matmul(l.init_c_w, in), l.init_c_b));
  return s;
}

void taped_lstm_step(const GeneratorModel& gen, const TapedLeaves& l, const Var& x,
                     TapedState& s) {
  int h = gen.config.hidden_dim;
  Var gates = add_colvec(matmul(l.lstm_w, vcat(x, s.h)), l.lstm_b);
  Var ig = sigmoid(rows(gates, 0, h));
  Var fg = sigmoid(rows(gates, h, h));
  Var og = sigmoid(rows(gates, 2 * h, h));
  Var gg = tanh_v(rows(gates, 3 * h, h));
  s.c = add(cmul(fg, s.c), cmul(ig, gg));
  s.h = cmul(og, tanh_v(s.c));
}

}  // namespace

Var taped_sequence_logprob(Tape& tape, GeneratorModel& gen,
                           const std::vector<const SampledSequence*>& batch,
                           const Matrix& weights) {
  const int b = static_cast<int>(batch.size());
  if (b == 0) throw UsageError("taped_sequence_logprob: empty batch");
  int zdim = gen.config.noise_dim;
  Matrix z(std::max(zdim, 0), b);
  std::vector<int> cats(static_cast<std::size_t>(b));
  int t_max = 0;
  for (int j = 0; j < b; ++j) {
    const SampledSequence& s = *batch[static_cast<std::size_t>(j)];
    if (zdim > 0) {
      if (s.noise.rows() != zdim) {
        throw UsageError("taped_sequence_logprob: sample is missing its noise input");
      }
      z.col(j) = s.noise.col(0);
    }
    cats[static_cast<std::size_t>(j)] = s.score_category;
    t_max = std::max(t_max, s.seq.true_length);
  }

  TapedLeaves leaves = bind_leaves(tape, gen);
  TapedState state = taped_init_state(tape, gen, leaves, z, cats);

  std::vector<int> prev(static_cast<std::size_t>(b), Vocab::kEndId);
  Var total = constant(tape, Matrix::Zero(1, b));
  for (int t = 0; t < t_max; ++t) {
    Var x = gather_cols(leaves.embed, prev);
    taped_lstm_step(gen, leaves, x, state);
    Var lsm = log_softmax_cols(add_colvec(matmul(leaves.out_w, state.h), leaves.out_b));
    std::vector<int> targets(static_cast<std::size_t>(b), Vocab::kEndId);
    Matrix w = Matrix::Zero(1, b);
    for (int j = 0; j < b; ++j) {
      const SampledSequence& s = *batch[static_cast<std::size_t>(j)];
      if (t < s.seq.true_length) {
        int a = s.seq.ids[static_cast<std::size_t>(t)];
        targets[static_cast<std::size_t>(j)] = a;
        w(0, j) = weights(t, j);
        prev[static_cast<std::size_t>(j)] = a == Vocab::kEndId ? Vocab::kEndId : a;
      } else {
        prev[static_cast<std::size_t>(j)] = Vocab::kEndId;
      }
    }
    total = add(total, cmul_const(pick_per_col(lsm, targets), w));
  }
  return total;
}

std::vector<Scalar> mle_pretrain(GeneratorModel& gen,
                                 const std::vector<std::pair<TokenSeq, int>>& data,
                                 int epochs, Scalar rate, int batch_size, Rng& rng) {
  if (data.empty()) throw UsageError("mle_pretrain: empty dataset");
  if (epochs < 0) throw ArgumentError("mle_pretrain: negative epoch count");
  if (batch_size < 1) throw ArgumentError("mle_pretrain: batch size must be >= 1");
  const int t_len = gen.config.t_len;
  const int zdim = gen.config.noise_dim;

  std::vector<Scalar> epoch_nll;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int ep = 0; ep < epochs; ++ep) {
    Rng erng = rng.fork(static_cast<std::uint64_t>(ep));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::size_t j = erng.uniform_int(i + 1);
      std::swap(order[i], order[j]);
    }
    Scalar nll_sum = 0.0;
    Scalar token_count = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch_size)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      int b = static_cast<int>(stop - start);

      // Teacher-forced targets: the observed tokens plus one terminating END
      // when the sequence is shorter than T.
      std::vector<SampledSequence> shaped(static_cast<std::size_t>(b));
      std::vector<const SampledSequence*> ptrs(static_cast<std::size_t>(b));
      int t_max = 0;
      for (int j = 0; j < b; ++j) {
        const auto& [seq, cat] = data[order[start + static_cast<std::size_t>(j)]];
        SampledSequence& s = shaped[static_cast<std::size_t>(j)];
        s.seq = seq;
        if (seq.true_length < t_len) s.seq.true_length = seq.true_length + 1;
        s.score_category = cat;
        s.noise = Matrix(std::max(zdim, 0), 1);
        for (int d = 0; d < zdim; ++d) s.noise(d, 0) = erng.normal();
        ptrs[static_cast<std::size_t>(j)] = &s;
        t_max = std::max(t_max, s.seq.true_length);
      }
      Matrix weights = Matrix::Zero(std::max(t_max, 1), b);
      Scalar batch_tokens = 0.0;
      for (int j = 0; j < b; ++j) {
        for (int t = 0; t < shaped[static_cast<std::size_t>(j)].seq.true_length; ++t) weights(t, j) = 1.0;
        batch_tokens += shaped[static_cast<std::size_t>(j)].seq.true_length;
      }

      Tape tape;
      Var lp_rows = taped_sequence_logprob(tape, gen, ptrs, weights);
      Var mean_nll = scale(sum_all(lp_rows), -1.0 / batch_tokens);
      nll_sum += mean_nll.scalar() * batch_tokens;
      token_count += batch_tokens;
      tape.backward(mean_nll);
      grad_step(gen.params, rate, StepDirection::Descend);
    }
    epoch_nll.push_back(nll_sum / token_count);
  }
  return epoch_nll;
}

void policy_update(GeneratorModel& gen, const std::vector<PolicyExample>& batch,
                   Scalar rate) {
  if (batch.empty()) throw UsageError("policy_update: empty batch");
  int t_max = 0;
  for (const PolicyExample& ex : batch) {
    for (Scalar r : ex.rewards) {
      if (!std::isfinite(r)) throw NumericError("policy_update: non-finite reward");
    }
    int len = ex.sample.seq.true_length;
    if (ex.rewards.size() != 1 && static_cast<int>(ex.rewards.size()) != len) {
      throw UsageError("policy_update: rewards must be scalar or one per action");
    }
    t_max = std::max(t_max, len);
  }
  const int b = static_cast<int>(batch.size());
  Matrix weights = Matrix::Zero(std::max(t_max, 1), b);
  std::vector<const SampledSequence*> ptrs(static_cast<std::size_t>(b));
  for (int j = 0; j < b; ++j) {
    const PolicyExample& ex = batch[static_cast<std::size_t>(j)];
    ptrs[static_cast<std::size_t>(j)] = &ex.sample;
    for (int t = 0; t < ex.sample.seq.true_length; ++t) {
      weights(t, j) = ex.rewards.size() == 1 ? ex.rewards[0]
                                             : ex.rewards[static_cast<std::size_t>(t)];
    }
  }
  Tape tape;
  Var surrogate = sum_all(taped_sequence_logprob(tape, gen, ptrs, weights));
  tape.backward(surrogate);
  grad_step(gen.params, rate, StepDirection::Ascend);
}

}  // namespace scoregan
