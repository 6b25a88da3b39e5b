#include "scoregan/generator.hpp"

#include "scoregan/fastops.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <map>

using namespace scoregan;

namespace {

GeneratorConfig tiny_config(int vocab, int t_len, int noise_dim = 0) {
  GeneratorConfig cfg;
  cfg.vocab_size = vocab;
  cfg.embed_dim = 6;
  cfg.hidden_dim = 8;
  cfg.noise_dim = noise_dim;
  cfg.score_embed_dim = 4;
  cfg.categories = 5;
  cfg.t_len = t_len;
  return cfg;
}

/// Total log-probability of a sampled sequence via the taped teacher-forced
/// path (independent of the sampler's bookkeeping).
Scalar taped_total_logprob(GeneratorModel& gen, const SampledSequence& s) {
  Tape tape;
  Matrix weights = Matrix::Ones(std::max(s.seq.true_length, 1), 1);
  std::vector<const SampledSequence*> ptrs{&s};
  Var row = taped_sequence_logprob(tape, gen, ptrs, weights);
  return row.value()(0, 0);
}

}  // namespace

TEST_CASE("sample: a dominating logit is drawn with frequency >= 0.99") {
  GeneratorModel gen(tiny_config(5, 4), 3);
  gen.params.at("out_w").value.setZero();
  gen.params.at("out_b").value.setZero();
  gen.params.at("out_b").value(3, 0) = 10.0;  // token 3 logit +10 over the rest

  Rng rng(17);
  auto samples = sample(gen, 2, 10000, rng);
  int hits = 0;
  for (const auto& s : samples) {
    if (s.seq.ids[0] == 3) ++hits;
  }
  CHECK(static_cast<Scalar>(hits) / 10000.0 >= 0.99);
}

TEST_CASE("sample: same seed and score give identical sequences") {
  GeneratorModel gen(tiny_config(12, 8, 4), 5);
  Rng a(123), b(123);
  auto sa = sample(gen, 1, 20, a);
  auto sb = sample(gen, 1, 20, b);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].seq.ids == sb[i].seq.ids);
    CHECK(sa[i].stepwise_logprob == sb[i].stepwise_logprob);
    CHECK((sa[i].noise.array() == sb[i].noise.array()).all());
  }
}

TEST_CASE("sample: errors") {
  GeneratorModel gen(tiny_config(6, 4), 1);
  Rng rng(1);
  CHECK_THROWS_AS(sample(gen, 7, 1, rng), ArgumentError);  // score out of range
  CHECK_THROWS_AS(sample(gen, -1, 1, rng), ArgumentError);
  CHECK_THROWS_AS(sample(gen, 1, 0, rng), ArgumentError);
}

TEST_CASE("sample: first-step empirical distribution matches the exact softmax") {
  // noise_dim = 0 makes the first-step distribution a deterministic function
  // of the score, so the exact probabilities are computable.
  GeneratorConfig cfg = tiny_config(20, 3, 0);
  GeneratorModel gen(cfg, 21);
  const int cat = 3;

  // Independent re-derivation of the step-1 softmax from the stored weights.
  Vector e_c = gen.params.at("score_embed").value.col(cat);
  Vector h = ((gen.params.at("init_h_w").value * e_c) + gen.params.at("init_h_b").value.col(0))
                 .array()
                 .tanh();
  Vector c_state =
      ((gen.params.at("init_c_w").value * e_c) + gen.params.at("init_c_b").value.col(0))
          .array()
          .tanh();
  Vector x = gen.params.at("embed").value.col(Vocab::kEndId);
  Vector in(x.size() + h.size());
  in << x, h;
  Vector gates = gen.params.at("lstm_w").value * in + gen.params.at("lstm_b").value.col(0);
  int hd = cfg.hidden_dim;
  auto sig = [](Scalar v) { return 1.0 / (1.0 + std::exp(-v)); };
  Vector ig = gates.segment(0, hd).unaryExpr(sig);
  Vector fg = gates.segment(hd, hd).unaryExpr(sig);
  Vector og = gates.segment(2 * hd, hd).unaryExpr(sig);
  Vector gg = gates.segment(3 * hd, hd).array().tanh();
  c_state = fg.cwiseProduct(c_state) + ig.cwiseProduct(gg);
  h = og.cwiseProduct(c_state.array().tanh().matrix());
  Vector probs = softmax(gen.params.at("out_w").value * h + gen.params.at("out_b").value.col(0));

  const int n = 100000;
  Rng rng(4242);
  auto samples = sample(gen, cat, n, rng);
  Vector counts = Vector::Zero(cfg.vocab_size);
  for (const auto& s : samples) counts[s.seq.ids[0]] += 1.0;
  Scalar tv = 0.5 * (counts / static_cast<Scalar>(n) - probs).cwiseAbs().sum();
  CHECK(tv <= 0.01);
}

TEST_CASE("sampled sequences: stepwise log-probabilities are consistent") {
  GeneratorModel gen(tiny_config(10, 6, 3), 8);
  Rng rng(5);
  auto samples = sample(gen, 2, 25, rng);
  for (auto& s : samples) {
    CHECK(s.seq.true_length >= 1);
    CHECK(static_cast<int>(s.stepwise_logprob.size()) == s.seq.true_length);
    Scalar total = 0.0;
    for (Scalar lp : s.stepwise_logprob) {
      CHECK(lp <= 0.0);
      total += lp;
    }
    // Invariant: the recorded per-step values sum to log G(seq | c), here
    // recomputed through the independent taped path.
    CHECK(taped_total_logprob(gen, s) == doctest::Approx(total).epsilon(1e-9));
    for (int t = s.seq.true_length; t < s.seq.length(); ++t) {
      CHECK(s.seq.ids[static_cast<std::size_t>(t)] == Vocab::kEndId);
    }
  }
}

TEST_CASE("rollout_complete: prefix of length T-1 changes at most the last slot") {
  GeneratorModel gen(tiny_config(8, 6, 2), 9);
  Rng seed_rng(31);
  TokenSeq prefix;
  prefix.ids = {3, 4, 5, 3, 2, Vocab::kEndId};
  prefix.true_length = 5;
  auto completions = rollout_complete(gen, prefix, 1, 10, seed_rng);
  for (const auto& c : completions) {
    for (int t = 0; t < 5; ++t) {
      CHECK(c.seq.ids[static_cast<std::size_t>(t)] == prefix.ids[static_cast<std::size_t>(t)]);
    }
  }
}

TEST_CASE("rollout_complete: same seed gives identical completions; length errors") {
  GeneratorModel gen(tiny_config(8, 5, 2), 10);
  TokenSeq prefix;
  prefix.ids = {2, 3, Vocab::kEndId, Vocab::kEndId, Vocab::kEndId};
  prefix.true_length = 2;
  Rng a(6), b(6);
  auto ca = rollout_complete(gen, prefix, 0, 7, a);
  auto cb = rollout_complete(gen, prefix, 0, 7, b);
  for (std::size_t i = 0; i < ca.size(); ++i) CHECK(ca[i].seq.ids == cb[i].seq.ids);

  TokenSeq full;
  full.ids = {2, 3, 4, 5, 6};
  full.true_length = 5;
  CHECK_THROWS_AS(rollout_complete(gen, full, 0, 1, a), UsageError);
}

TEST_CASE("rollout_complete: empty prefix is distributionally identical to sample") {
  GeneratorModel gen(tiny_config(9, 7, 3), 11);
  TokenSeq empty;
  empty.ids.assign(7, Vocab::kEndId);
  empty.true_length = 0;
  Rng a(88), b(88);
  auto from_rollout = rollout_complete(gen, empty, 2, 12, a);
  auto from_sample = sample(gen, 2, 12, b);
  REQUIRE(from_rollout.size() == from_sample.size());
  for (std::size_t i = 0; i < from_rollout.size(); ++i) {
    CHECK(from_rollout[i].seq.ids == from_sample[i].seq.ids);
    CHECK(from_rollout[i].stepwise_logprob == from_sample[i].stepwise_logprob);
  }
}

TEST_CASE("rollout_complete: empirical completion distribution matches exhaustive enumeration") {
  // vocab 3, T 3, prefix length 1; noise_dim 0 so the conditional is exact.
  GeneratorConfig cfg = tiny_config(3, 3, 0);
  GeneratorModel gen(cfg, 14);
  const int cat = 4;

  TokenSeq prefix;
  prefix.ids = {2, Vocab::kEndId, Vocab::kEndId};
  prefix.true_length = 1;

  // Completion outcomes with exact conditional probabilities from the taped
  // path: p(completion) = exp(lp(full) - lp(prefix)).
  auto seq_of = [&](std::vector<int> actions) {
    SampledSequence s;
    s.seq.ids.assign(3, Vocab::kEndId);
    for (std::size_t k = 0; k < actions.size(); ++k) s.seq.ids[k] = actions[k];
    s.seq.true_length = static_cast<int>(actions.size());
    s.score_category = cat;
    s.noise = Matrix(0, 1);
    return s;
  };
  SampledSequence just_prefix = seq_of({2});
  Scalar lp_prefix = taped_total_logprob(gen, just_prefix);

  std::vector<std::vector<int>> outcomes = {{2, 0},    {2, 1, 0}, {2, 1, 1}, {2, 1, 2},
                                            {2, 2, 0}, {2, 2, 1}, {2, 2, 2}};
  std::map<std::vector<int>, Scalar> exact;
  Scalar total = 0.0;
  for (const auto& actions : outcomes) {
    SampledSequence s = seq_of(actions);
    Scalar p = std::exp(taped_total_logprob(gen, s) - lp_prefix);
    exact[s.seq.ids] = p;
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  const int n = 50000;
  Rng rng(909);
  auto completions = rollout_complete(gen, prefix, cat, n, rng);
  std::map<std::vector<int>, Scalar> counts;
  for (const auto& c : completions) counts[c.seq.ids] += 1.0 / n;

  Scalar tv = 0.0;
  for (const auto& [ids, p] : exact) {
    Scalar q = counts.count(ids) ? counts.at(ids) : 0.0;
    tv += std::abs(p - q);
  }
  for (const auto& [ids, q] : counts) CHECK(exact.count(ids) == 1);
  tv *= 0.5;
  CHECK(tv <= 0.02);
}

TEST_CASE("mle_pretrain: a single repeated sequence is memorized (NLL -> 0)") {
  GeneratorConfig cfg = tiny_config(5, 6, 0);
  cfg.hidden_dim = 16;
  GeneratorModel gen(cfg, 19);
  TokenSeq seq;
  seq.ids = {2, 3, Vocab::kEndId, Vocab::kEndId, Vocab::kEndId, Vocab::kEndId};
  seq.true_length = 2;
  std::vector<std::pair<TokenSeq, int>> data(8, {seq, 1});
  Rng rng(2);
  auto nll = mle_pretrain(gen, data, 50, 2.0, 8, rng);
  REQUIRE(nll.size() == 50);
  CHECK(nll.back() <= 0.05);  // nats per token at the delta-distribution optimum
  CHECK(nll.back() <= nll.front());
}

TEST_CASE("mle_pretrain: zero epochs leaves parameters unchanged; empty data rejected") {
  GeneratorModel gen(tiny_config(6, 4, 2), 23);
  Matrix before = gen.params.at("lstm_w").value;
  std::vector<std::pair<TokenSeq, int>> data;
  TokenSeq seq;
  seq.ids = {2, Vocab::kEndId, Vocab::kEndId, Vocab::kEndId};
  seq.true_length = 1;
  data.push_back({seq, 0});
  Rng rng(3);
  auto nll = mle_pretrain(gen, data, 0, 0.1, 4, rng);
  CHECK(nll.empty());
  CHECK((gen.params.at("lstm_w").value.array() == before.array()).all());
  std::vector<std::pair<TokenSeq, int>> empty;
  CHECK_THROWS_AS(mle_pretrain(gen, empty, 1, 0.1, 4, rng), UsageError);
}

TEST_CASE("mle_pretrain: matched score condition scores lower NLL than mismatched (rho=1)") {
  SynthSpec spec;
  spec.vocab_size = 60;
  spec.size = 300;
  spec.fraud_fraction = 1.0;  // all fraud: this is the X_fh pool
  spec.rho = 1.0;
  spec.min_tokens = 4;
  spec.max_tokens = 8;
  auto corpus = synth_corpus(spec, 51);
  Vocab vocab = Vocab::build(corpus, 1);

  GeneratorConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.embed_dim = 12;
  cfg.hidden_dim = 16;
  cfg.noise_dim = 0;
  cfg.score_embed_dim = 4;
  cfg.categories = 5;
  cfg.t_len = 10;
  GeneratorModel gen(cfg, 29);

  std::vector<std::pair<TokenSeq, int>> data;
  for (const auto& r : corpus) {
    data.push_back({encode(r, vocab, cfg.t_len), score_category(r.score, spec.scheme)});
  }
  Rng rng(4);
  mle_pretrain(gen, data, 12, 0.25, 32, rng);

  auto mean_nll = [&](bool mismatch) {
    Scalar total = 0.0;
    int tokens = 0;
    for (const auto& [seq, cat] : data) {
      SampledSequence s;
      s.seq = seq;
      s.seq.true_length = std::min(seq.true_length + 1, cfg.t_len);
      s.score_category = mismatch ? (cat + 2) % 5 : cat;
      s.noise = Matrix(0, 1);
      Tape tape;
      Matrix w = Matrix::Ones(s.seq.true_length, 1);
      std::vector<const SampledSequence*> ptrs{&s};
      total -= taped_sequence_logprob(tape, gen, ptrs, w).value()(0, 0);
      tokens += s.seq.true_length;
    }
    return total / tokens;
  };
  CHECK(mean_nll(false) < mean_nll(true));
}

TEST_CASE("policy_update: zero rewards leave parameters unchanged") {
  GeneratorModel gen(tiny_config(7, 5, 2), 33);
  Rng rng(8);
  auto samples = sample(gen, 1, 4, rng);
  Matrix before = gen.params.at("out_w").value;
  std::vector<PolicyExample> batch;
  for (auto& s : samples) batch.push_back({s, {0.0}});
  policy_update(gen, batch, 0.1);
  CHECK((gen.params.at("out_w").value.array() == before.array()).all());
}

TEST_CASE("policy_update: positive reward strictly increases the sequence's log-probability") {
  GeneratorModel gen(tiny_config(7, 5, 2), 37);
  Rng rng(9);
  auto samples = sample(gen, 3, 1, rng);
  Scalar before = taped_total_logprob(gen, samples[0]);
  std::vector<PolicyExample> batch{{samples[0], {1.0}}};
  policy_update(gen, batch, 0.05);
  Scalar after = taped_total_logprob(gen, samples[0]);
  CHECK(after > before);
}

TEST_CASE("policy_update: rewards r and 2r move parameters by exact scalar multiples") {
  GeneratorConfig cfg = tiny_config(7, 5, 2);
  GeneratorModel gen_a(cfg, 41);
  GeneratorModel gen_b(cfg, 41);
  Rng ra(10), rb(10);
  auto sa = sample(gen_a, 2, 3, ra);
  auto sb = sample(gen_b, 2, 3, rb);

  Matrix init = gen_a.params.at("lstm_w").value;
  std::vector<PolicyExample> batch_a, batch_b;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    Scalar r = 0.25 * static_cast<Scalar>(i + 1);
    batch_a.push_back({sa[i], {r}});
    batch_b.push_back({sb[i], {2 * r}});
  }
  policy_update(gen_a, batch_a, 0.01);
  policy_update(gen_b, batch_b, 0.01);
  Matrix da = gen_a.params.at("lstm_w").value - init;
  Matrix db = gen_b.params.at("lstm_w").value - init;
  CHECK((db - 2.0 * da).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("policy_update: errors") {
  GeneratorModel gen(tiny_config(7, 5, 2), 43);
  Rng rng(11);
  auto samples = sample(gen, 1, 1, rng);
  CHECK_THROWS_AS(policy_update(gen, {}, 0.1), UsageError);
  std::vector<PolicyExample> bad{{samples[0], {std::numeric_limits<Scalar>::infinity()}}};
  CHECK_THROWS_AS(policy_update(gen, bad, 0.1), NumericError);
}

TEST_CASE("policy surrogate gradient equals finite differences of the expected reward") {
  // Enumerable sequence space: T = 1, vocab 3; J = sum_a p(a) R(a).
  GeneratorConfig cfg = tiny_config(3, 1, 0);
  GeneratorModel gen(cfg, 47);
  const int cat = 0;
  const Vector reward = (Vector(3) << 0.3, -0.2, 0.9).finished();

  auto seq_of = [&](int action) {
    SampledSequence s;
    s.seq.ids = {action};
    s.seq.true_length = 1;
    s.score_category = cat;
    s.noise = Matrix(0, 1);
    return s;
  };

  auto logprob_of = [&](GeneratorModel& g, int action) {
    SampledSequence s = seq_of(action);
    Tape tape;
    std::vector<const SampledSequence*> ptrs{&s};
    return taped_sequence_logprob(tape, g, ptrs, Matrix::Ones(1, 1)).value()(0, 0);
  };
  auto expected_reward = [&]() {
    Scalar j = 0.0;
    for (int a = 0; a < 3; ++a) j += std::exp(logprob_of(gen, a)) * reward[a];
    return j;
  };

  // One policy_update step with batch items weighted by p(a) R(a) applies
  // exactly gamma * grad J; recover the gradient from the parameter delta.
  std::map<std::string, Matrix> init;
  for (auto& [name, p] : gen.params) init[name] = p.value;
  std::vector<PolicyExample> batch;
  for (int a = 0; a < 3; ++a) {
    batch.push_back({seq_of(a), {std::exp(logprob_of(gen, a)) * reward[a]}});
  }
  const Scalar gamma = 1e-6;
  policy_update(gen, batch, gamma);
  std::map<std::string, Matrix> grads;
  for (auto& [name, p] : gen.params) {
    grads[name] = (p.value - init.at(name)) / gamma;
    p.value = init.at(name);  // restore for finite differencing
  }

  const Scalar eps = 1e-5;
  Scalar worst = 0.0;
  for (auto& [name, p] : gen.params) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        Scalar saved = p.value(i, j);
        p.value(i, j) = saved + eps;
        Scalar up = expected_reward();
        p.value(i, j) = saved - eps;
        Scalar down = expected_reward();
        p.value(i, j) = saved;
        Scalar fd = (up - down) / (2 * eps);
        Scalar ad = grads.at(name)(i, j);
        Scalar denom = std::max({std::abs(fd), std::abs(ad), Scalar(1e-4)});
        worst = std::max(worst, std::abs(fd - ad) / denom);
      }
    }
  }
  CHECK(worst <= 1e-3);
}
