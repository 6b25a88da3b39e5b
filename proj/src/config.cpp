#include "scoregan/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace scoregan {

using nlohmann::json;

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("invalid boolean value: \"" + v + "\"");
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& v);

template <>
int parse_number<int>(const std::string& v) {
  return std::stoi(v);
}
template <>
Scalar parse_number<Scalar>(const std::string& v) {
  return std::stod(v);
}
template <>
std::uint64_t parse_number<std::uint64_t>(const std::string& v) {
  return std::stoull(v);
}

}  // namespace

void apply_config_kv(TrainConfig& c, const std::string& key, const std::string& value) {
  using Setter = std::function<void(TrainConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"seed", [](TrainConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>(v); }},
      {"threads", [](TrainConfig& c, const std::string& v) { c.threads = parse_number<int>(v); }},
      {"dataset", [](TrainConfig& c, const std::string& v) { c.dataset = v; }},
      {"embeddings_file", [](TrainConfig& c, const std::string& v) { c.embeddings_file = v; }},
      {"rating",
       [](TrainConfig& c, const std::string& v) {
         if (v == "five") c.rating = RatingScheme::FiveWay;
         else if (v == "binary") c.rating = RatingScheme::Binary;
         else throw ConfigError("rating must be \"five\" or \"binary\"");
       }},
      {"supervision", [](TrainConfig& c, const std::string& v) { c.supervision = parse_number<Scalar>(v); }},
      {"min_freq", [](TrainConfig& c, const std::string& v) { c.min_freq = parse_number<int>(v); }},
      {"t_len", [](TrainConfig& c, const std::string& v) { c.t_len = parse_number<int>(v); }},
      {"synth_vocab", [](TrainConfig& c, const std::string& v) { c.synth_vocab = parse_number<int>(v); }},
      {"synth_size", [](TrainConfig& c, const std::string& v) { c.synth_size = parse_number<int>(v); }},
      {"synth_fraud_fraction",
       [](TrainConfig& c, const std::string& v) { c.synth_fraud_fraction = parse_number<Scalar>(v); }},
      {"synth_rho", [](TrainConfig& c, const std::string& v) { c.synth_rho = parse_number<Scalar>(v); }},
      {"synth_bot_fraction",
       [](TrainConfig& c, const std::string& v) { c.synth_bot_fraction = parse_number<Scalar>(v); }},
      {"synth_min_tokens",
       [](TrainConfig& c, const std::string& v) { c.synth_min_tokens = parse_number<int>(v); }},
      {"synth_max_tokens",
       [](TrainConfig& c, const std::string& v) { c.synth_max_tokens = parse_number<int>(v); }},
      {"gen_embed_dim", [](TrainConfig& c, const std::string& v) { c.gen_embed_dim = parse_number<int>(v); }},
      {"gen_hidden_dim", [](TrainConfig& c, const std::string& v) { c.gen_hidden_dim = parse_number<int>(v); }},
      {"noise_dim", [](TrainConfig& c, const std::string& v) { c.noise_dim = parse_number<int>(v); }},
      {"score_embed_dim",
       [](TrainConfig& c, const std::string& v) { c.score_embed_dim = parse_number<int>(v); }},
      {"gamma", [](TrainConfig& c, const std::string& v) { c.gamma = parse_number<Scalar>(v); }},
      {"lr_gen_mle", [](TrainConfig& c, const std::string& v) { c.lr_gen_mle = parse_number<Scalar>(v); }},
      {"batch_gen", [](TrainConfig& c, const std::string& v) { c.batch_gen = parse_number<int>(v); }},
      {"pretrain_gen_epochs",
       [](TrainConfig& c, const std::string& v) { c.pretrain_gen_epochs = parse_number<int>(v); }},
      {"disc_windows", [](TrainConfig& c, const std::string& v) { c.disc_windows = parse_int_list(v); }},
      {"disc_filters", [](TrainConfig& c, const std::string& v) { c.disc_filters = parse_int_list(v); }},
      {"embed_dim", [](TrainConfig& c, const std::string& v) { c.embed_dim = parse_number<int>(v); }},
      {"lr_disc", [](TrainConfig& c, const std::string& v) { c.lr_disc = parse_number<Scalar>(v); }},
      {"batch_disc", [](TrainConfig& c, const std::string& v) { c.batch_disc = parse_number<int>(v); }},
      {"pretrain_disc_steps",
       [](TrainConfig& c, const std::string& v) { c.pretrain_disc_steps = parse_number<int>(v); }},
      {"disc_steps_per_epoch",
       [](TrainConfig& c, const std::string& v) { c.disc_steps_per_epoch = parse_number<int>(v); }},
      {"features",
       [](TrainConfig& c, const std::string& v) {
         c.behavioral = FeatureFlags{};
         c.behavioral.score = false;  // filled below from flags; score comes from ablation
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (item.empty() || item == "none") continue;
           if (item == "mnr") c.behavioral.mnr = true;
           else if (item == "rl") c.behavioral.rl = true;
           else if (item == "se") c.behavioral.se = true;
           else if (item == "sr") c.behavioral.sr = true;
           else throw ConfigError("unknown behavioral feature: \"" + item + "\"");
         }
       }},
      {"outer_iters", [](TrainConfig& c, const std::string& v) { c.outer_iters = parse_number<int>(v); }},
      {"gen_inner", [](TrainConfig& c, const std::string& v) { c.gen_inner = parse_number<int>(v); }},
      {"disc_inner", [](TrainConfig& c, const std::string& v) { c.disc_inner = parse_number<int>(v); }},
      {"rollouts", [](TrainConfig& c, const std::string& v) { c.rollouts = parse_number<int>(v); }},
      {"lambda", [](TrainConfig& c, const std::string& v) { c.lambda = parse_number<Scalar>(v); }},
      {"igm_batch", [](TrainConfig& c, const std::string& v) { c.igm_batch = parse_number<int>(v); }},
      {"fb_pool", [](TrainConfig& c, const std::string& v) { c.fb_pool = parse_number<int>(v); }},
      {"score_in_g", [](TrainConfig& c, const std::string& v) { c.ablation.score_in_g = parse_bool(v); }},
      {"score_in_d", [](TrainConfig& c, const std::string& v) { c.ablation.score_in_d = parse_bool(v); }},
      {"regularizer_on",
       [](TrainConfig& c, const std::string& v) { c.ablation.regularizer_on = parse_bool(v); }},
      {"reward_baseline",
       [](TrainConfig& c, const std::string& v) { c.reward_baseline = parse_bool(v); }},
      {"augment_with_generated",
       [](TrainConfig& c, const std::string& v) { c.augment_with_generated = parse_bool(v); }},
      {"early_stop", [](TrainConfig& c, const std::string& v) { c.early_stop = parse_bool(v); }},
      {"patience", [](TrainConfig& c, const std::string& v) { c.patience = parse_number<int>(v); }},
      {"auc_target", [](TrainConfig& c, const std::string& v) { c.auc_target = parse_number<Scalar>(v); }},
      {"checkpoint_every",
       [](TrainConfig& c, const std::string& v) { c.checkpoint_every = parse_number<int>(v); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key: \"" + key + "\"");
  try {
    it->second(c, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid value for \"" + key + "\": " + e.what());
  }
}

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_kv(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return config;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json config_to_json(const TrainConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["dataset"] = c.dataset;
  j["embeddings_file"] = c.embeddings_file;
  j["rating"] = c.rating == RatingScheme::FiveWay ? "five" : "binary";
  j["supervision"] = c.supervision;
  j["min_freq"] = c.min_freq;
  j["t_len"] = c.t_len;
  j["synth_vocab"] = c.synth_vocab;
  j["synth_size"] = c.synth_size;
  j["synth_fraud_fraction"] = c.synth_fraud_fraction;
  j["synth_rho"] = c.synth_rho;
  j["synth_bot_fraction"] = c.synth_bot_fraction;
  j["synth_min_tokens"] = c.synth_min_tokens;
  j["synth_max_tokens"] = c.synth_max_tokens;
  j["gen_embed_dim"] = c.gen_embed_dim;
  j["gen_hidden_dim"] = c.gen_hidden_dim;
  j["noise_dim"] = c.noise_dim;
  j["score_embed_dim"] = c.score_embed_dim;
  j["gamma"] = c.gamma;
  j["lr_gen_mle"] = c.lr_gen_mle;
  j["batch_gen"] = c.batch_gen;
  j["pretrain_gen_epochs"] = c.pretrain_gen_epochs;
  j["disc_windows"] = c.disc_windows;
  j["disc_filters"] = c.disc_filters;
  j["embed_dim"] = c.embed_dim;
  j["lr_disc"] = c.lr_disc;
  j["batch_disc"] = c.batch_disc;
  j["pretrain_disc_steps"] = c.pretrain_disc_steps;
  j["disc_steps_per_epoch"] = c.disc_steps_per_epoch;
  j["features"] = json::array();
  if (c.behavioral.mnr) j["features"].push_back("mnr");
  if (c.behavioral.rl) j["features"].push_back("rl");
  if (c.behavioral.se) j["features"].push_back("se");
  if (c.behavioral.sr) j["features"].push_back("sr");
  j["outer_iters"] = c.outer_iters;
  j["gen_inner"] = c.gen_inner;
  j["disc_inner"] = c.disc_inner;
  j["rollouts"] = c.rollouts;
  j["lambda"] = c.lambda;
  j["igm_batch"] = c.igm_batch;
  j["fb_pool"] = c.fb_pool;
  j["score_in_g"] = c.ablation.score_in_g;
  j["score_in_d"] = c.ablation.score_in_d;
  j["regularizer_on"] = c.ablation.regularizer_on;
  j["reward_baseline"] = c.reward_baseline;
  j["augment_with_generated"] = c.augment_with_generated;
  j["early_stop"] = c.early_stop;
  j["patience"] = c.patience;
  j["auc_target"] = c.auc_target;
  j["checkpoint_every"] = c.checkpoint_every;
  j["optimizer"] = "sgd";
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.dataset = j.value("dataset", c.dataset);
  c.embeddings_file = j.value("embeddings_file", c.embeddings_file);
  c.rating = j.value("rating", "five") == std::string("binary") ? RatingScheme::Binary
                                                                : RatingScheme::FiveWay;
  c.supervision = j.value("supervision", c.supervision);
  c.min_freq = j.value("min_freq", c.min_freq);
  c.t_len = j.value("t_len", c.t_len);
  c.synth_vocab = j.value("synth_vocab", c.synth_vocab);
  c.synth_size = j.value("synth_size", c.synth_size);
  c.synth_fraud_fraction = j.value("synth_fraud_fraction", c.synth_fraud_fraction);
  c.synth_rho = j.value("synth_rho", c.synth_rho);
  c.synth_bot_fraction = j.value("synth_bot_fraction", c.synth_bot_fraction);
  c.synth_min_tokens = j.value("synth_min_tokens", c.synth_min_tokens);
  c.synth_max_tokens = j.value("synth_max_tokens", c.synth_max_tokens);
  c.gen_embed_dim = j.value("gen_embed_dim", c.gen_embed_dim);
  c.gen_hidden_dim = j.value("gen_hidden_dim", c.gen_hidden_dim);
  c.noise_dim = j.value("noise_dim", c.noise_dim);
  c.score_embed_dim = j.value("score_embed_dim", c.score_embed_dim);
  c.gamma = j.value("gamma", c.gamma);
  c.lr_gen_mle = j.value("lr_gen_mle", c.lr_gen_mle);
  c.batch_gen = j.value("batch_gen", c.batch_gen);
  c.pretrain_gen_epochs = j.value("pretrain_gen_epochs", c.pretrain_gen_epochs);
  if (j.contains("disc_windows")) c.disc_windows = j.at("disc_windows").get<std::vector<int>>();
  if (j.contains("disc_filters")) c.disc_filters = j.at("disc_filters").get<std::vector<int>>();
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.lr_disc = j.value("lr_disc", c.lr_disc);
  c.batch_disc = j.value("batch_disc", c.batch_disc);
  c.pretrain_disc_steps = j.value("pretrain_disc_steps", c.pretrain_disc_steps);
  c.disc_steps_per_epoch = j.value("disc_steps_per_epoch", c.disc_steps_per_epoch);
  c.behavioral = FeatureFlags{};
  c.behavioral.score = false;
  if (j.contains("features")) {
    for (const auto& f : j.at("features")) {
      std::string name = f.get<std::string>();
      if (name == "mnr") c.behavioral.mnr = true;
      if (name == "rl") c.behavioral.rl = true;
      if (name == "se") c.behavioral.se = true;
      if (name == "sr") c.behavioral.sr = true;
    }
  }
  c.outer_iters = j.value("outer_iters", c.outer_iters);
  c.gen_inner = j.value("gen_inner", c.gen_inner);
  c.disc_inner = j.value("disc_inner", c.disc_inner);
  c.rollouts = j.value("rollouts", c.rollouts);
  c.lambda = j.value("lambda", c.lambda);
  c.igm_batch = j.value("igm_batch", c.igm_batch);
  c.fb_pool = j.value("fb_pool", c.fb_pool);
  c.ablation.score_in_g = j.value("score_in_g", true);
  c.ablation.score_in_d = j.value("score_in_d", true);
  c.ablation.regularizer_on = j.value("regularizer_on", true);
  c.reward_baseline = j.value("reward_baseline", c.reward_baseline);
  c.augment_with_generated = j.value("augment_with_generated", c.augment_with_generated);
  c.early_stop = j.value("early_stop", c.early_stop);
  c.patience = j.value("patience", c.patience);
  c.auc_target = j.value("auc_target", c.auc_target);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  return c;
}

}  // namespace scoregan
