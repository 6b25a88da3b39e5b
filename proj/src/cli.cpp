#include "scoregan/cli.hpp"

#include "scoregan/experiment.hpp"
#include "scoregan/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace scoregan {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<Scalar> supervision;
  std::optional<Scalar> lambda;
  std::optional<int> rollouts;
  bool no_regularizer = false;
  bool no_score_in_g = false;
  bool no_score_in_d = false;
  std::string features;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run-config file (key = value lines)");
    cmd->add_option("--seed", seed, "seed for every RNG in the run");
    cmd->add_option("--threads", threads, "worker threads for rollout rewards (default 1)");
    cmd->add_option("--supervision", supervision, "training fraction of the corpus");
    cmd->add_option("--lambda", lambda, "regularizer weight");
    cmd->add_option("--rollouts", rollouts, "Monte-Carlo rollouts per word");
    cmd->add_flag("--no-regularizer", no_regularizer, "drop the information-gain term");
    cmd->add_flag("--no-score-in-g", no_score_in_g, "generator ignores the score input");
    cmd->add_flag("--no-score-in-d", no_score_in_d, "discriminators ignore the score input");
    cmd->add_option("--features", features, "behavioral features, comma list of mnr,rl,se,sr");
  }

  TrainConfig resolve() const {
    TrainConfig config = config_path.empty() ? TrainConfig{} : parse_config_file(config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (supervision) config.supervision = *supervision;
    if (lambda) config.lambda = *lambda;
    if (rollouts) config.rollouts = *rollouts;
    if (no_regularizer) config.ablation.regularizer_on = false;
    if (no_score_in_g) config.ablation.score_in_g = false;
    if (no_score_in_d) config.ablation.score_in_d = false;
    if (!features.empty()) apply_config_kv(config, "features", features);
    return config;
  }
};

std::vector<Review> load_training_corpus(const TrainConfig& config) {
  if (!config.dataset.empty()) {
    return load_corpus(config.dataset, config.rating, config.t_len);
  }
  SynthSpec spec;
  spec.vocab_size = config.synth_vocab;
  spec.size = config.synth_size;
  spec.fraud_fraction = config.synth_fraud_fraction;
  spec.rho = config.synth_rho;
  spec.bot_fraction_of_fraud = config.synth_bot_fraction;
  spec.min_tokens = config.synth_min_tokens;
  spec.max_tokens = config.synth_max_tokens;
  spec.scheme = config.rating;
  return synth_corpus(spec, Rng(config.seed).fork("corpus").seed());
}

void write_metrics_header(std::ostream& out) {
  out << "iteration,ap,auc,accuracy,n_pos,n_neg,seed,supervision,"
         "score_in_g,score_in_d,regularizer_on\n";
}

void write_metrics_row(std::ostream& out, const MetricsReport& r) {
  out << r.iteration << ',' << std::setprecision(10) << r.ap << ',' << r.auc << ','
      << r.accuracy << ',' << r.n_pos << ',' << r.n_neg << ',' << r.seed << ','
      << r.supervision << ',' << (r.ablation.score_in_g ? 1 : 0) << ','
      << (r.ablation.score_in_d ? 1 : 0) << ',' << (r.ablation.regularizer_on ? 1 : 0)
      << '\n';
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_synth_data(const CommonFlags& common, const SynthSpec& cli_spec,
                   const std::string& rating, const std::string& out_path) {
  TrainConfig config = common.resolve();
  SynthSpec spec = cli_spec;
  spec.scheme = rating == "binary" ? RatingScheme::Binary : RatingScheme::FiveWay;
  std::vector<Review> corpus = synth_corpus(spec, Rng(config.seed).fork("corpus").seed());
  save_corpus(out_path, corpus);
  std::cout << "wrote " << corpus.size() << " reviews to " << out_path << "\n";
  return 0;
}

int cmd_train(const CommonFlags& common, const std::string& out_dir,
              const std::string& resume_path) {
  TrainConfig config = common.resolve();
  fs::create_directories(out_dir);

  Checkpoint resume;
  bool resuming = !resume_path.empty();
  if (resuming) resume = load_checkpoint(resume_path);
  // A resumed run is driven by the checkpoint's config; the corpus must be
  // regenerated against that config for the split to line up.
  if (resuming) {
    TrainConfig from_ckpt = config_from_json(resume.meta.at("config"));
    from_ckpt.outer_iters = config.outer_iters;
    config = from_ckpt;
  }

  std::vector<Review> corpus = load_training_corpus(config);

  std::ofstream metrics(out_dir + "/metrics.csv");
  if (!metrics) throw DataError("cannot open metrics file in " + out_dir);
  write_metrics_header(metrics);
  MetricsSink sink = [&](const MetricsReport& r) { write_metrics_row(metrics, r); };

  std::string ckpt_path = out_dir + "/model.sgan";
  TrainResult result = adversarial_train(config, corpus, resuming ? &resume : nullptr,
                                         sink, ckpt_path);
  save_training_checkpoint(result.models, config, result.final_iteration, ckpt_path);

  std::ofstream cfg(out_dir + "/run-config.json");
  cfg << config_to_json(config).dump(2) << '\n';

  const MetricsReport& last = result.history.back();
  std::cout << "final iteration " << last.iteration << ": ap=" << std::setprecision(6)
            << last.ap << " auc=" << last.auc << " accuracy=" << last.accuracy << "\n";
  return 0;
}

int cmd_generate(const std::string& checkpoint_path, int score, int n,
                 std::uint64_t seed, const std::string& out_path) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  TrainConfig config;
  TrainedModels models = models_from_checkpoint(ckpt, &config);
  if (!valid_score(score, config.rating)) {
    throw ArgumentError("score " + std::to_string(score) + " invalid for this model");
  }
  int category = score_category(score, config.rating);
  Rng rng = Rng(seed).fork("generate");
  std::vector<SampledSequence> samples = sample(*models.gen, category, n, rng);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot open output file: " + out_path);
    out = &file;
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<std::string> tokens = decode(samples[i].seq, models.vocab);
    std::string text;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (k) text += ' ';
      text += tokens[k];
    }
    json j;
    j["review_id"] = "gen" + std::to_string(i);
    j["text"] = text;
    j["score"] = score;
    j["label"] = label_name(ReviewLabel::FraudBot);
    (*out) << j.dump() << '\n';
  }
  return 0;
}

int cmd_detect(const std::string& checkpoint_path, const std::string& in_path,
               const std::string& out_path) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  TrainConfig config;
  TrainedModels models = models_from_checkpoint(ckpt, &config);

  std::ifstream in(in_path);
  if (!in) throw DataError("cannot open input file: " + in_path);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot open output file: " + out_path);

  std::string line;
  std::size_t line_no = 0;
  std::vector<json> rows;
  std::vector<Review> reviews;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      Review r;
      std::istringstream ts(j.at("text").get<std::string>());
      std::string tok;
      while (ts >> tok) r.tokens.push_back(tok);
      if (r.tokens.empty()) r.tokens.push_back(Vocab::kUnkToken);
      // Over-length rows are truncated so every input row gets a probability.
      if (static_cast<int>(r.tokens.size()) >= config.t_len) {
        r.tokens.resize(static_cast<std::size_t>(config.t_len - 1));
      }
      r.score = j.at("score").get<int>();
      if (!valid_score(r.score, config.rating)) {
        throw FormatError("score invalid for this model's rating scheme");
      }
      r.review_id = j.value("review_id", "r" + std::to_string(line_no));
      r.user_id = j.value("user_id", "");
      r.date = j.value("date", "");
      std::string label = j.value("label", "genuine");
      r.label = label == "genuine" ? ReviewLabel::Genuine
                                   : (label == "fraud-bot" ? ReviewLabel::FraudBot
                                                           : ReviewLabel::FraudHuman);
      reviews.push_back(std::move(r));
      rows.push_back(std::move(j));
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<RankedPrediction> preds = score_reviews(
      *models.dg, models.embeddings, models.vocab, reviews, config.rating, config.t_len);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i]["fraud_probability"] = preds[i].score;
    out << rows[i].dump() << '\n';
  }
  std::cout << "scored " << rows.size() << " reviews\n";
  return 0;
}

int cmd_evaluate(const std::string& in_path, const std::string& out_path, Scalar threshold) {
  std::ifstream in(in_path);
  if (!in) throw DataError("cannot open input file: " + in_path);
  std::vector<RankedPrediction> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      RankedPrediction p;
      p.score = j.at("fraud_probability").get<Scalar>();
      std::string label = j.at("label").get<std::string>();
      p.fraud = label != "genuine";
      preds.push_back(p);
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  Scalar ap = average_precision(preds);
  Scalar roc = auc(preds);
  Scalar acc = accuracy(preds, threshold);
  int n_pos = 0, n_neg = 0;
  for (const RankedPrediction& p : preds) (p.fraud ? n_pos : n_neg) += 1;
  std::cout << std::setprecision(10) << "ap=" << ap << " auc=" << roc
            << " accuracy=" << acc << " n_pos=" << n_pos << " n_neg=" << n_neg << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot open output file: " + out_path);
    out << "ap,auc,accuracy,n_pos,n_neg\n";
    out << std::setprecision(10) << ap << ',' << roc << ',' << acc << ',' << n_pos << ','
        << n_neg << '\n';
  }
  return 0;
}

int cmd_experiment(const CommonFlags& common, const std::string& kind_name, int n_seeds,
                   const std::string& out_dir) {
  TrainConfig config = common.resolve();
  ExperimentKind kind = experiment_kind_from_name(kind_name);
  std::vector<Review> corpus = load_training_corpus(config);
  std::string dataset_name =
      config.dataset.empty() ? "synthetic" : fs::path(config.dataset).stem().string();
  ExperimentReport report = run_experiment(kind, config, corpus, n_seeds, dataset_name);
  fs::create_directories(out_dir);
  write_report_csv(report, out_dir + "/report.csv");
  write_trace_csv(report, experiment_name(kind), out_dir + "/trace.csv");
  std::cout << "wrote " << report.rows.size() << " rows to " << out_dir << "/report.csv\n";
  return 0;
}

// Minimal CSV reader: quoted fields, doubled quotes, commas inside quotes.
std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

int cmd_convert_dataset(const std::string& style, const std::string& in_path,
                        const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw DataError("cannot open input file: " + in_path);

  bool yelp_style = style == "yelp";
  if (!yelp_style && style != "tripadvisor") {
    throw ArgumentError("convert-dataset: style must be \"yelp\" or \"tripadvisor\"");
  }
  // yelp: review_id,user_id,item_id,date,score,label,text
  // tripadvisor: review_id,score,label,text
  const std::size_t expected = yelp_style ? 7 : 4;

  std::vector<Review> reviews;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = parse_csv_line(line);
    if (line_no == 1 && !f.empty() && f[0] == "review_id") continue;  // header
    if (f.size() != expected) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expected) + " fields, got " + std::to_string(f.size()));
    }
    Review r;
    std::size_t k = 0;
    r.review_id = f[k++];
    if (yelp_style) {
      r.user_id = f[k++];
      r.item_id = f[k++];
      r.date = f[k++];
    }
    r.score = std::stoi(f[k++]);
    std::string label = f[k++];
    if (label == "genuine") r.label = ReviewLabel::Genuine;
    else if (label == "fraud") r.label = ReviewLabel::FraudHuman;
    else throw FormatError("csv line " + std::to_string(line_no) + ": unknown label \"" + label + "\"");
    std::istringstream ts(f[k]);
    std::string tok;
    while (ts >> tok) r.tokens.push_back(tok);
    if (r.tokens.empty()) throw FormatError("csv line " + std::to_string(line_no) + ": empty text");
    reviews.push_back(std::move(r));
  }
  save_corpus(out_path, reviews);
  std::cout << "converted " << reviews.size() << " reviews to " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"score-regularized adversarial fraud-review toolkit"};
  app.require_subcommand(1);

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "write a deterministic synthetic corpus");
  CommonFlags synth_common;
  synth_common.attach(synth);
  SynthSpec spec;
  std::string synth_rating = "five";
  std::string synth_out;
  synth->add_option("--vocab", spec.vocab_size, "synthetic vocabulary size");
  synth->add_option("--size", spec.size, "number of reviews");
  synth->add_option("--fraud-fraction", spec.fraud_fraction, "fraction labeled fraud");
  synth->add_option("--rho", spec.rho, "score-correlation strength in [0,1]");
  synth->add_option("--bot-fraction", spec.bot_fraction_of_fraud,
                    "fraction of fraud drawn from the bot distribution");
  synth->add_option("--min-tokens", spec.min_tokens, "minimum review length");
  synth->add_option("--max-tokens", spec.max_tokens, "maximum review length");
  synth->add_option("--rating", synth_rating, "five or binary");
  synth->add_option("--out", synth_out, "output JSONL path")->required();

  // train
  auto* train = app.add_subcommand("train", "run adversarial training");
  CommonFlags train_common;
  train_common.attach(train);
  std::string train_out = "train-out";
  std::string resume_path;
  train->add_option("--out", train_out, "output directory (model.sgan, metrics.csv)");
  train->add_option("--resume", resume_path, "checkpoint to resume from");

  // generate
  auto* generate = app.add_subcommand("generate", "sample reviews from a checkpoint");
  std::string gen_ckpt, gen_out;
  int gen_score = 5, gen_n = 1;
  std::uint64_t gen_seed = 1;
  generate->add_option("--checkpoint", gen_ckpt, "model checkpoint")->required();
  generate->add_option("--score", gen_score, "requested score (1..5 or -1/1)");
  generate->add_option("--n", gen_n, "number of reviews");
  generate->add_option("--seed", gen_seed, "sampling seed");
  generate->add_option("--out", gen_out, "output JSONL path (default stdout)");

  // detect
  auto* detect = app.add_subcommand("detect", "append fraud probabilities to a JSONL file");
  std::string det_ckpt, det_in, det_out;
  detect->add_option("--checkpoint", det_ckpt, "model checkpoint")->required();
  detect->add_option("--in", det_in, "input JSONL")->required();
  detect->add_option("--out", det_out, "output JSONL")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "metrics from a scored JSONL file");
  std::string eval_in, eval_out;
  Scalar eval_threshold = 0.5;
  evaluate->add_option("--in", eval_in, "scored JSONL (fraud_probability + label)")->required();
  evaluate->add_option("--out", eval_out, "optional CSV output");
  evaluate->add_option("--threshold", eval_threshold, "accuracy threshold");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a configured experiment grid");
  CommonFlags exp_common;
  exp_common.attach(experiment);
  std::string exp_kind, exp_out = "experiment-out";
  int exp_seeds = 3;
  experiment->add_option("--kind", exp_kind,
                         "ablation-score | behavioral-combos | regularization-convergence | "
                         "supervision-sweep | cross-dataset | generated-vs-human-only")
      ->required();
  experiment->add_option("--seeds", exp_seeds, "seeds per cell");
  experiment->add_option("--out", exp_out, "output directory");

  // convert-dataset
  auto* convert = app.add_subcommand("convert-dataset", "map an external CSV layout to JSONL");
  std::string conv_style, conv_in, conv_out;
  convert->add_option("--style", conv_style, "yelp or tripadvisor")->required();
  convert->add_option("--in", conv_in, "input CSV")->required();
  convert->add_option("--out", conv_out, "output JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth_data(synth_common, spec, synth_rating, synth_out);
    if (train->parsed()) return cmd_train(train_common, train_out, resume_path);
    if (generate->parsed()) return cmd_generate(gen_ckpt, gen_score, gen_n, gen_seed, gen_out);
    if (detect->parsed()) return cmd_detect(det_ckpt, det_in, det_out);
    if (evaluate->parsed()) return cmd_evaluate(eval_in, eval_out, eval_threshold);
    if (experiment->parsed()) return cmd_experiment(exp_common, exp_kind, exp_seeds, exp_out);
    if (convert->parsed()) return cmd_convert_dataset(conv_style, conv_in, conv_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace scoregan
