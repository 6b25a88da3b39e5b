#include "scoregan/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>

namespace scoregan {

using nlohmann::json;

int category_count(RatingScheme scheme) {
  return scheme == RatingScheme::FiveWay ? 5 : 2;
}

int score_category(int score, RatingScheme scheme) {
  if (!valid_score(score, scheme)) {
    throw ArgumentError("score out of range: " + std::to_string(score));
  }
  if (scheme == RatingScheme::FiveWay) return score - 1;
  return score == -1 ? 0 : 1;
}

int category_to_score(int category, RatingScheme scheme) {
  int c = category_count(scheme);
  if (category < 0 || category >= c) {
    throw ArgumentError("score category out of range: " + std::to_string(category));
  }
  if (scheme == RatingScheme::FiveWay) return category + 1;
  return category == 0 ? -1 : 1;
}

Scalar normalized_score(int score, RatingScheme scheme) {
  int c = category_count(scheme);
  return static_cast<Scalar>(score_category(score, scheme)) / static_cast<Scalar>(c - 1);
}

bool valid_score(int score, RatingScheme scheme) {
  if (scheme == RatingScheme::FiveWay) return score >= 1 && score <= 5;
  return score == -1 || score == 1;
}

const char* label_name(ReviewLabel label) {
  switch (label) {
    case ReviewLabel::Genuine: return "genuine";
    case ReviewLabel::FraudHuman: return "fraud";
    case ReviewLabel::FraudBot: return "fraud-bot";
  }
  return "genuine";
}

bool is_fraud(ReviewLabel label) { return label != ReviewLabel::Genuine; }

// ---------------------------------------------------------------------------
// Vocab
// ---------------------------------------------------------------------------

Vocab::Vocab() {
  tokens_ = {kEndToken, kUnkToken};
  ids_ = {{kEndToken, kEndId}, {kUnkToken, kUnkId}};
}

Vocab Vocab::build(const std::vector<Review>& corpus, int min_freq) {
  if (corpus.empty()) throw ArgumentError("build_vocab: empty corpus");
  if (min_freq < 1) throw ArgumentError("build_vocab: min_freq must be >= 1");
  std::map<std::string, long long> freq;
  for (const Review& r : corpus)
    for (const std::string& tok : r.tokens) ++freq[tok];

  std::vector<std::pair<std::string, long long>> kept;
  for (const auto& [tok, n] : freq) {
    if (n >= min_freq && tok != kEndToken && tok != kUnkToken) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  for (const auto& [tok, n] : kept) {
    v.ids_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  Vocab v;
  for (const std::string& tok : tokens) {
    if (tok == kEndToken || tok == kUnkToken) continue;
    if (v.ids_.count(tok)) continue;
    v.ids_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

int Vocab::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || id >= size()) throw ArgumentError("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(const std::string& token) const { return ids_.count(token) > 0; }

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

TokenSeq encode(const Review& review, const Vocab& vocab, int t_len) {
  int n = static_cast<int>(review.tokens.size());
  if (n >= t_len) {
    throw ArgumentError("encode: review has " + std::to_string(n) +
                        " tokens, max is " + std::to_string(t_len - 1));
  }
  TokenSeq seq;
  seq.ids.assign(static_cast<std::size_t>(t_len), Vocab::kEndId);
  for (int i = 0; i < n; ++i) seq.ids[static_cast<std::size_t>(i)] = vocab.id_of(review.tokens[static_cast<std::size_t>(i)]);
  seq.true_length = n;
  return seq;
}

std::vector<std::string> decode(const TokenSeq& seq, const Vocab& vocab) {
  std::vector<std::string> out;
  for (int id : seq.ids) {
    if (id == Vocab::kEndId) break;
    out.push_back(vocab.token_of(id));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

ReviewLabel parse_label(const std::string& s) {
  if (s == "genuine") return ReviewLabel::Genuine;
  if (s == "fraud" || s == "fraud-human") return ReviewLabel::FraudHuman;
  if (s == "fraud-bot") return ReviewLabel::FraudBot;
  throw FormatError("unknown label: \"" + s + "\"");
}

}  // namespace

std::vector<Review> load_corpus(const std::string& path, RatingScheme scheme,
                                int max_tokens, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  std::vector<Review> reviews;
  LoadStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    try {
      Review r;
      if (!j.contains("text") || !j.contains("score") || !j.contains("label")) {
        throw FormatError("missing required field (text, score, label)");
      }
      r.tokens = tokenize(j.at("text").get<std::string>());
      if (r.tokens.empty()) throw FormatError("empty review text");
      r.score = j.at("score").get<int>();
      if (!valid_score(r.score, scheme)) {
        throw FormatError("score " + std::to_string(r.score) + " invalid for scheme");
      }
      r.label = parse_label(j.at("label").get<std::string>());
      r.review_id = j.value("review_id", "r" + std::to_string(line_no));
      r.item_id = j.value("item_id", "");
      r.user_id = j.value("user_id", "");
      r.date = j.value("date", "");
      if (static_cast<int>(r.tokens.size()) >= max_tokens) {
        ++local.rejected_too_long;
        continue;
      }
      reviews.push_back(std::move(r));
      ++local.accepted;
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  local.empty_file = (line_no == 0);
  if (stats) *stats = local;
  return reviews;
}

void save_corpus(const std::string& path, const std::vector<Review>& reviews) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  for (const Review& r : reviews) {
    json j;
    j["review_id"] = r.review_id;
    std::string text;
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
      if (i) text += ' ';
      text += r.tokens[i];
    }
    j["text"] = text;
    j["score"] = r.score;
    j["label"] = label_name(r.label);
    if (!r.item_id.empty()) j["item_id"] = r.item_id;
    if (!r.user_id.empty()) j["user_id"] = r.user_id;
    if (!r.date.empty()) j["date"] = r.date;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Behavioral features
// ---------------------------------------------------------------------------

std::map<std::string, BehavioralVector> extract_behavioral(
    const std::vector<Review>& corpus, RatingScheme scheme) {
  // user -> date -> count, and user -> total reviews
  std::map<std::string, std::map<std::string, int>> per_day;
  std::map<std::string, int> totals;
  for (const Review& r : corpus) {
    if (r.user_id.empty()) continue;
    ++per_day[r.user_id][r.date];
    ++totals[r.user_id];
  }

  std::map<std::string, BehavioralVector> out;
  for (const Review& r : corpus) {
    BehavioralVector v;
    v.rl = static_cast<Scalar>(r.tokens.size());
    int cat = score_category(r.score, scheme);
    v.se = (scheme == RatingScheme::FiveWay) ? (r.score <= 3 ? 1 : 0) : (cat == 0 ? 1 : 0);
    if (r.user_id.empty()) {
      v.mnr = 0.0;
      v.sr = 1;
    } else {
      int mnr = 0;
      for (const auto& [date, n] : per_day[r.user_id]) mnr = std::max(mnr, n);
      v.mnr = static_cast<Scalar>(mnr);
      v.sr = totals[r.user_id] == 1 ? 1 : 0;
    }
    out[r.review_id] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

std::pair<std::vector<Review>, std::vector<Review>> split_corpus(
    const std::vector<Review>& corpus, Scalar train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ArgumentError("split: train_ratio must be in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    by_class[static_cast<int>(corpus[i].label)].push_back(i);
  }
  std::vector<std::size_t> train_idx, test_idx;
  Rng base(seed);
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < 2) {
      throw DataError(std::string("split: class \"") +
                      label_name(static_cast<ReviewLabel>(cls)) +
                      "\" has fewer than 2 members");
    }
    Rng rng = base.fork(static_cast<std::uint64_t>(cls));
    // Fisher-Yates on the class indices.
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::size_t j = rng.uniform_int(i + 1);
      std::swap(idx[i], idx[j]);
    }
    auto n_train = static_cast<std::size_t>(
        std::llround(train_ratio * static_cast<Scalar>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::pair<std::vector<Review>, std::vector<Review>> out;
  for (std::size_t i : train_idx) out.first.push_back(corpus[i]);
  for (std::size_t i : test_idx) out.second.push_back(corpus[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

SynthBlocks synth_blocks(int vocab_size) {
  int tenth = vocab_size / 10;
  SynthBlocks b;
  b.pos_begin = 0;
  b.pos_end = tenth;
  b.neg_begin = tenth;
  b.neg_end = 2 * tenth;
  b.fraud_begin = 2 * tenth;
  b.fraud_end = 3 * tenth;
  b.genuine_begin = 3 * tenth;
  b.genuine_end = 4 * tenth;
  return b;
}

std::string synth_token(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%03d", index);
  return buf;
}

namespace {

struct ReviewPlan {
  ReviewLabel label;
  bool bot_style;
};

int draw_in(Rng& rng, int begin, int end) {
  return begin + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(end - begin)));
}

}  // namespace

std::vector<Review> synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.vocab_size < 10) throw ArgumentError("synth_corpus: vocab size must be >= 10");
  if (spec.size < 1) throw ArgumentError("synth_corpus: size must be >= 1");
  if (spec.min_tokens < 2 || spec.max_tokens < spec.min_tokens) {
    throw ArgumentError("synth_corpus: invalid token length range");
  }
  if (spec.rho < 0.0 || spec.rho > 1.0) throw ArgumentError("synth_corpus: rho must be in [0, 1]");

  const SynthBlocks blocks = synth_blocks(spec.vocab_size);
  const int common_begin = blocks.genuine_end;
  const int common_end = spec.vocab_size;

  // Exact class counts, then a seeded shuffle of the plan.
  auto n_fraud = static_cast<int>(std::llround(spec.fraud_fraction * spec.size));
  n_fraud = std::clamp(n_fraud, 0, spec.size);
  auto n_bot = static_cast<int>(std::llround(spec.bot_fraction_of_fraud * n_fraud));
  n_bot = std::clamp(n_bot, 0, n_fraud);

  std::vector<ReviewPlan> plan;
  plan.reserve(static_cast<std::size_t>(spec.size));
  for (int i = 0; i < n_fraud - n_bot; ++i) plan.push_back({ReviewLabel::FraudHuman, false});
  for (int i = 0; i < n_bot; ++i) plan.push_back({ReviewLabel::FraudHuman, true});
  for (int i = n_fraud; i < spec.size; ++i) plan.push_back({ReviewLabel::Genuine, false});

  Rng shuffle_rng = Rng(seed).fork("plan");
  for (std::size_t i = plan.size() - 1; i > 0; --i) {
    std::size_t j = shuffle_rng.uniform_int(i + 1);
    std::swap(plan[i], plan[j]);
  }

  // Prolific fraudster pool for behavioral-feature structure.
  int prolific_pool = std::max(1, n_fraud / 10);

  Rng rng = Rng(seed).fork("reviews");
  std::vector<Review> corpus;
  corpus.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const ReviewPlan& p = plan[i];
    Review r;
    r.review_id = "s" + std::to_string(i);
    r.label = p.label;
    r.item_id = "i" + std::to_string(rng.uniform_int(50));

    bool fraud = is_fraud(p.label);
    bool positive = rng.uniform() < 0.5;

    // Score band follows sentiment with strength rho.
    bool high = rng.uniform() < (positive ? (1.0 + spec.rho) / 2.0 : (1.0 - spec.rho) / 2.0);
    if (spec.scheme == RatingScheme::FiveWay) {
      r.score = high ? 4 + static_cast<int>(rng.uniform_int(2))
                     : 1 + static_cast<int>(rng.uniform_int(3));
    } else {
      r.score = high ? 1 : -1;
    }

    int len = spec.min_tokens +
              static_cast<int>(rng.uniform_int(
                  static_cast<std::uint64_t>(spec.max_tokens - spec.min_tokens + 1)));
    int style_begin = fraud ? blocks.fraud_begin : blocks.genuine_begin;
    int style_end = fraud ? blocks.fraud_end : blocks.genuine_end;
    Scalar bigram_bias = p.bot_style ? 0.6 : 0.25;

    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(len));
    // Leading token always carries the sentiment.
    ids.push_back(positive ? draw_in(rng, blocks.pos_begin, blocks.pos_end)
                           : draw_in(rng, blocks.neg_begin, blocks.neg_end));
    for (int k = 1; k < len; ++k) {
      if (rng.uniform() < bigram_bias) {
        // Successor of the previous token within the vocabulary.
        ids.push_back((ids.back() + 1) % spec.vocab_size);
        continue;
      }
      Scalar u = rng.uniform();
      if (u < 0.10) {
        ids.push_back(positive ? draw_in(rng, blocks.pos_begin, blocks.pos_end)
                               : draw_in(rng, blocks.neg_begin, blocks.neg_end));
      } else if (u < 0.55) {
        int tok = draw_in(rng, style_begin, style_end);
        // Bot-style reviews reuse a narrower half of the style block.
        if (p.bot_style) tok = style_begin + (tok - style_begin) / 2;
        ids.push_back(tok);
      } else {
        ids.push_back(draw_in(rng, common_begin, common_end));
      }
    }
    for (int id : ids) r.tokens.push_back(synth_token(id));

    // Metadata: genuine users are unique; some fraudsters are prolific and
    // post many reviews on a single day.
    if (p.label == ReviewLabel::FraudHuman && !p.bot_style && rng.uniform() < 0.5) {
      r.user_id = "spammer" + std::to_string(rng.uniform_int(static_cast<std::uint64_t>(prolific_pool)));
      r.date = "2015-01-05";
    } else if (!p.bot_style) {
      r.user_id = "u" + std::to_string(i);
      int day = static_cast<int>(rng.uniform_int(28)) + 1;
      r.date = "2015-01-" + std::string(day < 10 ? "0" : "") + std::to_string(day);
    }
    corpus.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace scoregan
