// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Everything deterministic; temporary artifacts live under /tmp.

#include "scoregan/cli.hpp"
#include "scoregan/experiment.hpp"
#include "scoregan/trainer.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace scoregan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scalar median5(std::vector<Scalar> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared model / corpus recipes (the desk-scale presets)
// ---------------------------------------------------------------------------

TrainConfig desk_synth_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  c.t_len = 32;
  c.supervision = 0.7;
  c.synth_vocab = 200;
  c.synth_size = 2000;
  c.synth_fraud_fraction = 0.3;
  c.synth_rho = 0.8;
  c.synth_min_tokens = 8;
  c.synth_max_tokens = 24;
  c.gen_embed_dim = 24;
  c.gen_hidden_dim = 24;
  c.noise_dim = 8;
  c.score_embed_dim = 8;
  c.gamma = 0.01;
  c.lr_gen_mle = 0.3;
  c.batch_gen = 12;
  c.pretrain_gen_epochs = 5;
  c.disc_windows = {1, 2, 3};
  c.disc_filters = {16, 16, 16};
  c.embed_dim = 50;
  c.lr_disc = 0.1;
  c.batch_disc = 64;
  c.pretrain_disc_steps = 60;
  c.disc_steps_per_epoch = 10;
  c.outer_iters = 15;
  c.gen_inner = 2;
  c.disc_inner = 2;
  c.rollouts = 4;
  c.igm_batch = 8;
  c.fb_pool = 64;
  return c;
}

std::vector<Review> synth_corpus_of(const TrainConfig& c) {
  SynthSpec spec;
  spec.vocab_size = c.synth_vocab;
  spec.size = c.synth_size;
  spec.fraud_fraction = c.synth_fraud_fraction;
  spec.rho = c.synth_rho;
  spec.bot_fraction_of_fraud = c.synth_bot_fraction;
  spec.min_tokens = c.synth_min_tokens;
  spec.max_tokens = c.synth_max_tokens;
  return synth_corpus(spec, Rng(c.seed).fork("corpus").seed());
}

TrainConfig desk_score_config(std::uint64_t seed, bool regularizer) {
  TrainConfig c;
  c.seed = seed;
  c.t_len = 16;
  c.supervision = 0.7;
  c.synth_vocab = 60;
  c.synth_size = 1000;
  c.synth_fraud_fraction = 0.5;
  c.synth_rho = 1.0;
  c.synth_min_tokens = 5;
  c.synth_max_tokens = 10;
  c.gen_embed_dim = 20;
  c.gen_hidden_dim = 24;
  c.noise_dim = 8;
  c.score_embed_dim = 8;
  c.gamma = 0.03;
  c.lr_gen_mle = 1.0;
  c.batch_gen = 12;
  c.pretrain_gen_epochs = 40;
  c.disc_windows = {1, 2, 3};
  c.disc_filters = {16, 16, 16};
  c.embed_dim = 50;
  c.lr_disc = 0.1;
  c.batch_disc = 64;
  c.pretrain_disc_steps = 40;
  c.disc_steps_per_epoch = 12;
  c.outer_iters = 120;
  c.gen_inner = 1;
  c.disc_inner = 3;
  c.rollouts = 4;
  c.lambda = 2.0;
  c.igm_batch = 32;
  c.fb_pool = 64;
  c.ablation.regularizer_on = regularizer;
  return c;
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient suite
// ---------------------------------------------------------------------------

Scalar fd_of(const std::function<Var(Tape&, ParamSet&)>& build, ParamSet& params) {
  auto value = [&]() {
    Tape t;
    return build(t, params).scalar();
  };
  auto compute = [&]() {
    params.zero_grads();
    Tape t;
    t.backward(build(t, params));
  };
  return oracles::finite_difference_max_rel_error(params, value, compute);
}

Outcome criterion_gradients() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  Scalar worst = 0.0;
  auto track = [&](Scalar err) { worst = std::max(worst, err); };

  auto rand_m = [&](Eigen::Index r, Eigen::Index c) { return uniform_matrix(rng, r, c, -1.0, 1.0); };
  auto contract = [](const Var& v, const Matrix& w) { return sum_all(cmul_const(v, w)); };

  {  // matrix multiply
    ParamSet p;
    p.add("a", rand_m(3, 4));
    p.add("b", rand_m(4, 2));
    Matrix w = rand_m(3, 2);
    track(fd_of([&](Tape& t, ParamSet& ps) { return contract(matmul(leaf(t, ps, "a"), leaf(t, ps, "b")), w); }, p));
  }
  {  // concatenation
    ParamSet p;
    p.add("a", rand_m(2, 3));
    p.add("b", rand_m(3, 3));
    Matrix w = rand_m(5, 3);
    track(fd_of([&](Tape& t, ParamSet& ps) { return contract(vcat(leaf(t, ps, "a"), leaf(t, ps, "b")), w); }, p));
  }
  {  // relu
    ParamSet p;
    p.add("a", rand_m(4, 4));
    Matrix w = rand_m(4, 4);
    track(fd_of([&](Tape& t, ParamSet& ps) { return contract(relu(leaf(t, ps, "a")), w); }, p));
  }
  {  // recurrent cell: teacher-forced LSTM steps over a 2-sequence batch
    GeneratorConfig g;
    g.vocab_size = 6;
    g.embed_dim = 5;
    g.hidden_dim = 6;
    g.noise_dim = 2;
    g.score_embed_dim = 3;
    g.categories = 4;
    g.t_len = 3;
    GeneratorModel gen(g, 103);
    Rng srng(7);
    auto samples = sample(gen, 1, 2, srng);
    int t_max = std::max(samples[0].seq.true_length, samples[1].seq.true_length);
    Matrix weights = Matrix::Ones(t_max, 2);
    track(fd_of(
        [&](Tape& t, ParamSet&) {
          std::vector<const SampledSequence*> ptrs{&samples[0], &samples[1]};
          return sum_all(taped_sequence_logprob(t, gen, ptrs, weights));
        },
        gen.params));
  }
  {  // convolution window + relu + max-pool over a constant input
    ParamSet p;
    p.add("k", rand_m(3, 8));
    p.add("kb", rand_m(3, 1));
    Matrix win = rand_m(8, 10);
    Matrix w = rand_m(3, 2);
    track(fd_of(
        [&](Tape& t, ParamSet& ps) {
          Var conv = relu(add_colvec(matmul(leaf(t, ps, "k"), constant(t, win)), leaf(t, ps, "kb")));
          return contract(colblock_max(conv, 5), w);
        },
        p));
  }
  {  // both softmax heads and cross-entropy, through one full Df loss
    DiscConfig cfg;
    cfg.kind = DiscKind::Df;
    cfg.window_sizes = {1, 2};
    cfg.filter_counts = {4, 4};
    cfg.embed_dim = 8;
    cfg.t_len = 6;
    cfg.categories = 3;
    cfg.features.score = true;
    cfg.features.rl = true;
    cfg.rl_max = 6.0;
    DiscriminatorModel df(cfg, 107);
    EmbeddingTable emb;
    Rng erng(9);
    emb.vectors = uniform_matrix(erng, 10, 8, -0.1, 0.1);
    TokenSeq s1;
    s1.ids = {2, 5, 7, 3, Vocab::kEndId, Vocab::kEndId};
    s1.true_length = 4;
    TokenSeq s2;
    s2.ids = {4, 6, Vocab::kEndId, Vocab::kEndId, Vocab::kEndId, Vocab::kEndId};
    s2.true_length = 2;
    BehavioralVector b1{0.0, 4.0, 1, 1}, b2{0.0, 2.0, 0, 1};
    std::vector<DiscInput> batch{{&s1, 1, b1}, {&s2, 2, b2}};
    track(fd_of(
        [&](Tape& t, ParamSet&) {
          TapedDiscOutput out = taped_d_forward(t, df, batch, emb);
          Var p_loss = scale(sum_all(pick_per_col(out.p_logsm, {1, 0})), -0.5);
          Var q_loss = scale(sum_all(pick_per_col(out.q_logsm, {1, 2})), -0.5);
          return add(p_loss, q_loss);
        },
        df.params));
  }
  {  // one full policy surrogate over sampled sequences with mixed rewards
    GeneratorConfig g;
    g.vocab_size = 7;
    g.embed_dim = 5;
    g.hidden_dim = 6;
    g.noise_dim = 3;
    g.score_embed_dim = 3;
    g.categories = 5;
    g.t_len = 5;
    GeneratorModel gen(g, 109);
    Rng srng(11);
    auto samples = sample(gen, 3, 4, srng);
    int t_max = 0;
    for (const auto& s : samples) t_max = std::max(t_max, s.seq.true_length);
    Matrix weights = Matrix::Zero(t_max, 4);
    Rng wr(13);
    for (int j = 0; j < 4; ++j)
      for (int t = 0; t < samples[static_cast<std::size_t>(j)].seq.true_length; ++t)
        weights(t, j) = wr.uniform(-1.0, 1.0);
    track(fd_of(
        [&](Tape& t, ParamSet&) {
          std::vector<const SampledSequence*> ptrs;
          for (const auto& s : samples) ptrs.push_back(&s);
          return sum_all(taped_sequence_logprob(t, gen, ptrs, weights));
        },
        gen.params));
  }

  double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = worst <= 1e-4 && elapsed < 60.0;
  out.detail = fmt("max rel err %.2e (<= 1e-4), %.1fs (< 60s)", worst, elapsed);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: IGM bound suite
// ---------------------------------------------------------------------------

Outcome criterion_igm_bounds() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(211);
  Scalar worst_gap_err = 0.0, worst_tight = 0.0, worst_lemma = 0.0;
  bool bound_held = true;

  auto random_joint = [&](int rows, int cols) {
    Matrix j(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) j(r, c) = rng.uniform(0.02, 1.0);
    return Matrix(j / j.sum());
  };
  auto random_cond = [&](int rows, int cols) {
    Matrix q(rows, cols);
    for (int c = 0; c < cols; ++c) {
      Vector col(rows);
      for (int r = 0; r < rows; ++r) col[r] = rng.uniform(0.02, 1.0);
      q.col(c) = col / col.sum();
    }
    return q;
  };

  for (int trial = 0; trial < 200; ++trial) {
    int rows = 2 + static_cast<int>(rng.uniform_int(5));
    int cols = 2 + static_cast<int>(rng.uniform_int(5));
    Matrix joint = random_joint(rows, cols);
    Matrix q = random_cond(rows, cols);
    Scalar l = variational_lower_bound(joint, q);
    Scalar i = mutual_information(joint);
    if (l > i + 1e-12) bound_held = false;
    worst_gap_err = std::max(worst_gap_err, std::abs((i - l) - oracles::expected_kl_gap(joint, q)));

    Matrix posterior(rows, cols);
    for (int x = 0; x < cols; ++x) posterior.col(x) = joint.col(x) / joint.col(x).sum();
    worst_tight = std::max(worst_tight, std::abs(variational_lower_bound(joint, posterior) - i));
  }
  for (int trial = 0; trial < 100; ++trial) {
    Matrix joint = random_joint(4, 4);
    Matrix f = uniform_matrix(rng, 4, 4, -2.0, 2.0);
    auto [lhs, rhs] = lemma_expectation_check(f, joint);
    worst_lemma = std::max(worst_lemma, std::abs(lhs - rhs));
  }

  double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = bound_held && worst_gap_err <= 1e-10 && worst_tight <= 1e-10 &&
             worst_lemma <= 1e-10 && elapsed < 10.0;
  out.detail = fmt("bound held on 200 pairs, gap err %.1e, tightness err %.1e, lemma err %.1e, %.1fs (< 10s)",
                   worst_gap_err, worst_tight, worst_lemma, elapsed);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: rollout-reward oracle
// ---------------------------------------------------------------------------

Outcome criterion_rollout_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  const int n = 50000;
  int failures = 0;
  Scalar worst_sigmas = 0.0;

  for (int instance = 0; instance < 20; ++instance) {
    std::uint64_t base = 3000 + static_cast<std::uint64_t>(instance);
    GeneratorConfig g;
    g.vocab_size = 3;
    g.embed_dim = 6;
    g.hidden_dim = 8;
    g.noise_dim = 0;
    g.score_embed_dim = 4;
    g.categories = 5;
    g.t_len = 3;
    GeneratorModel gen(g, base);
    DiscConfig dcfg;
    dcfg.kind = DiscKind::Df;
    dcfg.window_sizes = {1, 2};
    dcfg.filter_counts = {4, 4};
    dcfg.embed_dim = 6;
    dcfg.t_len = 3;
    dcfg.categories = 5;
    dcfg.features.score = true;
    DiscriminatorModel df(dcfg, base + 50);
    dcfg.kind = DiscKind::Dg;
    DiscriminatorModel dg(dcfg, base + 100);
    EmbeddingTable emb;
    Rng erng(base + 150);
    emb.vectors = uniform_matrix(erng, 3, 6, -0.1, 0.1);

    const int cat = static_cast<int>(instance % 5);
    TokenSeq prefix;
    prefix.ids = {2, Vocab::kEndId, Vocab::kEndId};
    prefix.true_length = 1;

    auto taped_lp = [&](const std::vector<int>& actions) {
      SampledSequence s;
      s.seq.ids.assign(3, Vocab::kEndId);
      for (std::size_t k = 0; k < actions.size(); ++k) s.seq.ids[k] = actions[k];
      s.seq.true_length = static_cast<int>(actions.size());
      s.score_category = cat;
      s.noise = Matrix(0, 1);
      Tape t;
      std::vector<const SampledSequence*> ptrs{&s};
      return taped_sequence_logprob(t, gen, ptrs, Matrix::Ones(s.seq.true_length, 1)).value()(0, 0);
    };
    Scalar lp_prefix = taped_lp({2});
    std::vector<std::vector<int>> outcomes = {{2, 0},    {2, 1, 0}, {2, 1, 1}, {2, 1, 2},
                                              {2, 2, 0}, {2, 2, 1}, {2, 2, 2}};
    Scalar exact = 0.0;
    for (const auto& actions : outcomes) {
      TokenSeq seq;
      seq.ids.assign(3, Vocab::kEndId);
      for (std::size_t k = 0; k < actions.size(); ++k) seq.ids[k] = actions[k];
      seq.true_length = static_cast<int>(actions.size());
      Scalar prob = std::exp(taped_lp(actions) - lp_prefix);
      BehavioralVector bv = bot_features(seq, cat, RatingScheme::FiveWay);
      DiscOutput from_df = d_forward(df, seq, emb, cat, bv);
      DiscOutput from_dg = d_forward(dg, seq, emb, cat, bv);
      exact += prob * (from_df.p[1] + from_dg.p[1]);
    }

    Rng mc_rng(base + 200);
    Scalar mc = mc_reward(gen, df, dg, emb, prefix, cat, n, mc_rng);

    // Standard error from the same rollout batch mc_reward consumed.
    Rng se_rng(base + 200);
    auto completions = rollout_complete(gen, prefix, cat, n, se_rng);
    Scalar var = 0.0;
    for (const auto& c : completions) {
      BehavioralVector bv = bot_features(c.seq, cat, RatingScheme::FiveWay);
      DiscOutput from_df = d_forward(df, c.seq, emb, cat, bv);
      DiscOutput from_dg = d_forward(dg, c.seq, emb, cat, bv);
      Scalar dev = from_df.p[1] + from_dg.p[1] - mc;
      var += dev * dev;
    }
    Scalar se = std::sqrt(var) / n;
    Scalar sigmas = se > 0 ? std::abs(mc - exact) / se : (mc == exact ? 0.0 : 1e9);
    worst_sigmas = std::max(worst_sigmas, sigmas);
    if (std::abs(mc - exact) > 3.0 * se + 1e-12) ++failures;
  }

  double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = failures == 0 && elapsed < 120.0;
  out.detail = fmt("20 instances, worst deviation %.2f sigma (<= 3), %.1fs (< 120s)", worst_sigmas, elapsed);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 4: metric oracles
// ---------------------------------------------------------------------------

Outcome criterion_metric_oracles() {
  Rng rng(401);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_int(29));
    int levels = 1 + static_cast<int>(rng.uniform_int(10));
    std::vector<RankedPrediction> preds;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      RankedPrediction p;
      p.score = static_cast<Scalar>(rng.uniform_int(static_cast<std::uint64_t>(levels))) / levels;
      p.fraud = rng.uniform() < 0.5;
      has_pos |= p.fraud;
      has_neg |= !p.fraud;
      preds.push_back(p);
    }
    if (!has_pos) preds[0].fraud = true;
    if (!has_neg) preds.push_back({0.1, false});

    if (auc(preds) != oracles::auc_all_pairs(preds)) ++mismatches;
    if (average_precision(preds) != oracles::average_precision_naive(preds)) ++mismatches;
    if (accuracy(preds, 0.5) != oracles::accuracy_count(preds, 0.5)) ++mismatches;
  }
  std::vector<RankedPrediction> all_tied{{0.3, true}, {0.3, false}, {0.3, true}, {0.3, false}};
  bool tie_ok = auc(all_tied) == 0.5;

  Outcome out;
  out.pass = mismatches == 0 && tie_ok;
  out.detail = fmt("%d mismatches across 1000 random sets, tie case %s", mismatches,
                   tie_ok ? "exactly 0.5" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 5 and 7: end-to-end learnability and regularization convergence
// ---------------------------------------------------------------------------

struct LearnabilityRuns {
  std::vector<Scalar> best_auc_on;
  std::vector<int> first_085_on;
  std::vector<int> first_085_off;
  Scalar baseline_auc = 0.0;
  double seconds_on = 0.0;
};

LearnabilityRuns run_learnability() {
  LearnabilityRuns runs;
  auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (bool reg : {true, false}) {
      TrainConfig c = desk_synth_config(seed);
      c.ablation.regularizer_on = reg;
      auto corpus = synth_corpus_of(c);
      Scalar best = 0.0;
      int first = -1;
      adversarial_train(c, corpus, nullptr, [&](const MetricsReport& m) {
        best = std::max(best, m.auc);
        if (first < 0 && m.auc >= 0.85) first = m.iteration;
      });
      if (reg) {
        runs.best_auc_on.push_back(best);
        runs.first_085_on.push_back(first < 0 ? 1000 : first);
        runs.seconds_on = seconds_since(t0);
      } else {
        runs.first_085_off.push_back(first < 0 ? 1000 : first);
      }
    }
  }

  // Count-based logistic baseline pre-validating the 0.90 threshold.
  TrainConfig c = desk_synth_config(1);
  auto corpus = synth_corpus_of(c);
  auto [train, test] = split_corpus(corpus, c.supervision, Rng(c.seed).fork("split").seed());
  Vocab vocab = Vocab::build(train, 1);
  auto ids_of = [&](const Review& r) {
    std::vector<int> ids;
    for (const auto& tok : r.tokens) ids.push_back(vocab.id_of(tok));
    return ids;
  };
  std::vector<std::vector<int>> train_x;
  std::vector<int> train_y;
  for (const Review& r : train) {
    train_x.push_back(ids_of(r));
    train_y.push_back(is_fraud(r.label) ? 1 : 0);
  }
  oracles::CountLogisticBaseline baseline(vocab.size());
  baseline.fit(train_x, train_y);
  std::vector<RankedPrediction> preds;
  for (const Review& r : test) preds.push_back({baseline.predict(ids_of(r)), is_fraud(r.label)});
  runs.baseline_auc = auc(preds);
  return runs;
}

Outcome criterion_learnability(const LearnabilityRuns& runs) {
  Scalar med = median5(runs.best_auc_on);
  Outcome out;
  out.pass = med >= 0.90 && runs.baseline_auc >= 0.90 && runs.seconds_on <= 900.0;
  out.detail = fmt("median best AUC %.4f (>= 0.90), baseline oracle %.4f (>= 0.90), %.0fs (<= 900s)",
                   med, runs.baseline_auc, runs.seconds_on);
  return out;
}

Outcome criterion_regularization_convergence(const LearnabilityRuns& runs) {
  std::vector<Scalar> on(runs.first_085_on.begin(), runs.first_085_on.end());
  std::vector<Scalar> off(runs.first_085_off.begin(), runs.first_085_off.end());
  Scalar med_on = median5(on), med_off = median5(off);
  Outcome out;
  out.pass = med_on <= med_off;
  out.detail = fmt("median iterations to AUC 0.85: regularized %.0f <= unregularized %.0f", med_on, med_off);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 6: score conditioning
// ---------------------------------------------------------------------------

Scalar probe_accuracy_of(TrainResult& r, std::uint64_t seed) {
  Rng rng = Rng(seed).fork("probe");
  std::vector<std::vector<int>> train_x, test_x;
  std::vector<int> train_y, test_y;
  const int categories = r.models.gen->config.categories;
  for (int cat = 0; cat < categories; ++cat) {
    for (auto& s : sample(*r.models.gen, cat, 120, rng)) {
      train_x.emplace_back(s.seq.ids.begin(), s.seq.ids.begin() + s.seq.true_length);
      train_y.push_back(cat);
    }
    for (auto& s : sample(*r.models.gen, cat, 60, rng)) {
      test_x.emplace_back(s.seq.ids.begin(), s.seq.ids.begin() + s.seq.true_length);
      test_y.push_back(cat);
    }
  }
  oracles::CountSoftmaxProbe probe(r.models.vocab.size(), categories);
  probe.fit(train_x, train_y);
  return probe.accuracy(test_x, test_y);
}

Outcome criterion_score_conditioning() {
  std::vector<Scalar> acc_on, acc_off;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig on = desk_score_config(seed, true);
    auto corpus = synth_corpus_of(on);
    TrainResult r_on = adversarial_train(on, corpus);
    acc_on.push_back(probe_accuracy_of(r_on, seed));
    TrainConfig off = desk_score_config(seed, false);
    TrainResult r_off = adversarial_train(off, corpus);
    acc_off.push_back(probe_accuracy_of(r_off, seed));
  }
  Scalar med_on = median5(acc_on), med_off = median5(acc_off);
  Outcome out;
  out.pass = med_on >= 0.8 && med_off < med_on;
  out.detail = fmt("median probe accuracy: regularized %.3f (>= 0.8), unregularized %.3f (strictly lower)",
                   med_on, med_off);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8: augmentation direction
// ---------------------------------------------------------------------------

Outcome criterion_augmentation() {
  std::vector<Scalar> diffs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig base = desk_synth_config(seed);
    base.synth_bot_fraction = 0.3;  // 30% of fraud drawn from the bot distribution
    auto corpus = synth_corpus_of(base);
    Scalar auc_aug = 0.0, auc_human = 0.0;
    for (bool aug : {true, false}) {
      TrainConfig c = base;
      c.augment_with_generated = aug;
      TrainResult r = adversarial_train(c, corpus);
      (aug ? auc_aug : auc_human) = r.history.back().auc;
    }
    diffs.push_back(auc_aug - auc_human);
  }
  Scalar med = median5(diffs);
  Outcome out;
  out.pass = med >= -0.01;
  out.detail = fmt("median AUC(augmented) - AUC(human-only) = %+.4f (>= -0.01)", med);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism
// ---------------------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scoregan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  fs::path dir = "/tmp/scoregan_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };

  std::string cfg = p("tiny.cfg");
  {
    std::ofstream out(cfg);
    out << "seed = 3\nt_len = 12\nsynth_vocab = 40\nsynth_size = 200\n"
        << "synth_fraud_fraction = 0.4\nsynth_min_tokens = 4\nsynth_max_tokens = 8\n"
        << "gen_embed_dim = 8\ngen_hidden_dim = 8\nnoise_dim = 4\nscore_embed_dim = 4\n"
        << "batch_gen = 4\npretrain_gen_epochs = 2\ndisc_windows = 1,2\ndisc_filters = 4,4\n"
        << "embed_dim = 8\nlr_disc = 0.1\nbatch_disc = 8\npretrain_disc_steps = 2\n"
        << "disc_steps_per_epoch = 2\nouter_iters = 2\ngen_inner = 1\ndisc_inner = 1\n"
        << "rollouts = 2\nigm_batch = 4\nfb_pool = 16\n";
  }

  std::vector<std::string> problems;

  if (cli({"synth-data", "--out", p("s1.jsonl"), "--seed", "5", "--size", "60", "--vocab", "30"}) != 0 ||
      cli({"synth-data", "--out", p("s2.jsonl"), "--seed", "5", "--size", "60", "--vocab", "30"}) != 0 ||
      slurp(p("s1.jsonl")) != slurp(p("s2.jsonl"))) {
    problems.push_back("synth-data");
  }
  if (cli({"train", "--config", cfg, "--out", p("t1")}) != 0 ||
      cli({"train", "--config", cfg, "--out", p("t2")}) != 0 ||
      slurp(p("t1") + "/model.sgan") != slurp(p("t2") + "/model.sgan") ||
      slurp(p("t1") + "/metrics.csv") != slurp(p("t2") + "/metrics.csv")) {
    problems.push_back("train");
  }
  std::string ckpt = p("t1") + "/model.sgan";
  if (cli({"generate", "--checkpoint", ckpt, "--score", "4", "--n", "5", "--seed", "8", "--out", p("g1.jsonl")}) != 0 ||
      cli({"generate", "--checkpoint", ckpt, "--score", "4", "--n", "5", "--seed", "8", "--out", p("g2.jsonl")}) != 0 ||
      slurp(p("g1.jsonl")) != slurp(p("g2.jsonl"))) {
    problems.push_back("generate");
  }
  if (cli({"detect", "--checkpoint", ckpt, "--in", p("s1.jsonl"), "--out", p("d1.jsonl")}) != 0 ||
      cli({"detect", "--checkpoint", ckpt, "--in", p("s1.jsonl"), "--out", p("d2.jsonl")}) != 0 ||
      slurp(p("d1.jsonl")) != slurp(p("d2.jsonl"))) {
    problems.push_back("detect");
  }
  if (cli({"evaluate", "--in", p("d1.jsonl"), "--out", p("e1.csv")}) != 0 ||
      cli({"evaluate", "--in", p("d1.jsonl"), "--out", p("e2.csv")}) != 0 ||
      slurp(p("e1.csv")) != slurp(p("e2.csv"))) {
    problems.push_back("evaluate");
  }
  if (cli({"experiment", "--kind", "regularization-convergence", "--config", cfg, "--seeds",
           "1", "--out", p("x1")}) != 0 ||
      cli({"experiment", "--kind", "regularization-convergence", "--config", cfg, "--seeds",
           "1", "--out", p("x2")}) != 0 ||
      slurp(p("x1") + "/report.csv") != slurp(p("x2") + "/report.csv") ||
      slurp(p("x1") + "/trace.csv") != slurp(p("x2") + "/trace.csv")) {
    problems.push_back("experiment");
  }
  {
    std::ofstream csv(p("conv.csv"));
    csv << "r1,u1,i1,2015-01-01,5,genuine,nice spot\nr2,u2,i2,2015-01-02,1,fraud,total scam\n";
  }
  if (cli({"convert-dataset", "--style", "yelp", "--in", p("conv.csv"), "--out", p("c1.jsonl")}) != 0 ||
      cli({"convert-dataset", "--style", "yelp", "--in", p("conv.csv"), "--out", p("c2.jsonl")}) != 0 ||
      slurp(p("c1.jsonl")) != slurp(p("c2.jsonl"))) {
    problems.push_back("convert-dataset");
  }

  // Checkpoint save/resume reproduces the uninterrupted run's metrics.
  {
    TrainConfig c = parse_config_file(cfg);
    c.outer_iters = 3;
    c.checkpoint_every = 2;
    auto corpus = synth_corpus_of(c);
    TrainResult continuous = adversarial_train(c, corpus, nullptr, {}, p("resume.sgan"));
    Checkpoint mid = load_checkpoint(p("resume.sgan") + ".iter2");
    TrainResult resumed = adversarial_train(c, corpus, &mid);
    if (resumed.history.empty() || continuous.history.empty() ||
        resumed.history.back().auc != continuous.history.back().auc ||
        resumed.history.back().ap != continuous.history.back().ap) {
      problems.push_back("checkpoint-resume");
    }
  }

  Outcome out;
  out.pass = problems.empty();
  if (problems.empty()) {
    out.detail = "all commands byte-identical under repeated seeds; resume matches continuous run";
  } else {
    out.detail = "failed: ";
    for (const auto& s : problems) out.detail += s + " ";
  }
  fs::remove_all(dir);
  return out;
}

// The CLI tie-in for the desk preset: train through the shipped config and
// check the final metrics row clears the acceptance bound.
Outcome desk_preset_via_cli() {
  fs::path dir = "/tmp/scoregan_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
#ifdef SCOREGAN_SOURCE_DIR
  std::string cfg = std::string(SCOREGAN_SOURCE_DIR) + "/configs/desk-synth.cfg";
#else
  std::string cfg = "configs/desk-synth.cfg";
#endif
  int status = cli({"train", "--config", cfg, "--out", (dir / "run").string()});
  Scalar final_auc = 0.0;
  std::ifstream metrics((dir / "run" / "metrics.csv").string());
  std::string line, last;
  std::getline(metrics, line);  // header
  while (std::getline(metrics, line)) {
    if (!line.empty()) last = line;
  }
  if (!last.empty()) {
    std::stringstream ss(last);
    std::string field;
    std::getline(ss, field, ',');  // iteration
    std::getline(ss, field, ',');  // ap
    std::getline(ss, field, ',');  // auc
    final_auc = std::stod(field);
  }
  fs::remove_all(dir);
  Outcome out;
  out.pass = status == 0 && final_auc >= 0.90;
  out.detail = fmt("exit %d, final AUC %.4f (>= 0.90)", status, final_auc);
  return out;
}

}  // namespace

int main() {
  struct Row {
    const char* name;
    Outcome outcome;
  };
  std::vector<Row> rows;

  rows.push_back({"1 gradient suite", criterion_gradients()});
  rows.push_back({"2 igm bound suite", criterion_igm_bounds()});
  rows.push_back({"3 rollout-reward oracle", criterion_rollout_oracle()});
  rows.push_back({"4 metric oracles", criterion_metric_oracles()});

  LearnabilityRuns runs = run_learnability();
  rows.push_back({"5 end-to-end learnability", criterion_learnability(runs)});
  rows.push_back({"5b desk preset via cli", desk_preset_via_cli()});
  rows.push_back({"6 score conditioning", criterion_score_conditioning()});
  rows.push_back({"7 regularization convergence", criterion_regularization_convergence(runs)});
  rows.push_back({"8 augmentation direction", criterion_augmentation()});
  rows.push_back({"9 determinism", criterion_determinism()});

  bool all_pass = true;
  for (const Row& row : rows) {
    std::printf("%s criterion %s: %s\n", row.outcome.pass ? "PASS" : "FAIL", row.name,
                row.outcome.detail.c_str());
    all_pass &= row.outcome.pass;
  }
  std::printf("%s\n", all_pass ? "ACCEPTANCE: ALL CRITERIA PASS" : "ACCEPTANCE: FAILURES PRESENT");
  return all_pass ? 0 : 1;
}
