#pragma once

#include "scoregan/common.hpp"
#include "scoregan/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scoregan {

enum class ReviewLabel { Genuine, FraudHuman, FraudBot };

/// Score layout of a dataset: 5-way ratings 1..5, or binary -1 (dislike) /
/// +1 (like). The constraint-category count C is 5 or 2 accordingly.
enum class RatingScheme { FiveWay, Binary };

int category_count(RatingScheme scheme);
/// Maps a raw score to its constraint category in [0, C).
int score_category(int score, RatingScheme scheme);
/// Inverse of score_category.
int category_to_score(int category, RatingScheme scheme);
/// Score mapped into [0, 1] for feature concatenation.
Scalar normalized_score(int score, RatingScheme scheme);
bool valid_score(int score, RatingScheme scheme);

const char* label_name(ReviewLabel label);
bool is_fraud(ReviewLabel label);

struct Review {
  std::string review_id;
  std::string item_id;  // empty when absent
  std::string user_id;  // empty when absent
  std::string date;     // ISO-8601, empty when absent
  std::vector<std::string> tokens;
  int score = 0;
  ReviewLabel label = ReviewLabel::Genuine;
};

/// Token ids with END = 0 and UNK = 1 reserved.
class Vocab {
 public:
  static constexpr int kEndId = 0;
  static constexpr int kUnkId = 1;
  static constexpr const char* kEndToken = "END";
  static constexpr const char* kUnkToken = "UNK";

  Vocab();

  /// Tokens below min_freq map to UNK. Deterministic id order:
  /// frequency descending, then token ascending.
  static Vocab build(const std::vector<Review>& corpus, int min_freq);

  /// For synthetic data where the token set is known up front.
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  int id_of(const std::string& token) const;
  const std::string& token_of(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

/// Fixed-length id sequence, END-padded.
struct TokenSeq {
  std::vector<int> ids;
  int true_length = 0;

  int length() const { return static_cast<int>(ids.size()); }
};

TokenSeq encode(const Review& review, const Vocab& vocab, int t_len);
/// Tokens of the non-END prefix.
std::vector<std::string> decode(const TokenSeq& seq, const Vocab& vocab);

struct LoadStats {
  std::size_t accepted = 0;
  std::size_t rejected_too_long = 0;
  bool empty_file = false;
};

/// Reads one review per JSONL line. Reviews with >= max_tokens tokens are
/// rejected and counted, not errors. Malformed lines throw FormatError with
/// the line number.
std::vector<Review> load_corpus(const std::string& path, RatingScheme scheme,
                                int max_tokens, LoadStats* stats = nullptr);

void save_corpus(const std::string& path, const std::vector<Review>& reviews);

struct BehavioralVector {
  Scalar mnr = 0.0;  // max reviews by this user on any single day
  Scalar rl = 1.0;   // token count
  int se = 0;        // score extremity flag
  int sr = 1;        // single-review flag
};

/// Reviews without user metadata get MNR = 0 and SR = 1.
std::map<std::string, BehavioralVector> extract_behavioral(
    const std::vector<Review>& corpus, RatingScheme scheme);

/// Stratified split preserving per-class counts within rounding; both sides
/// of every class stay nonempty. Deterministic per seed.
std::pair<std::vector<Review>, std::vector<Review>> split_corpus(
    const std::vector<Review>& corpus, Scalar train_ratio, std::uint64_t seed);

struct SynthSpec {
  int vocab_size = 200;
  int min_tokens = 8;
  int max_tokens = 24;
  int size = 2000;
  Scalar fraud_fraction = 0.3;
  Scalar rho = 0.8;  // score-correlation strength in [0, 1]
  Scalar bot_fraction_of_fraud = 0.0;
  RatingScheme scheme = RatingScheme::FiveWay;
};

/// Deterministic synthetic corpus. Genuine and fraud reviews come from two
/// distinct unigram-with-bigram-bias distributions over disjoint style blocks;
/// the leading token carries the review's sentiment, and the score's high/low
/// band follows the sentiment with probability (1 + rho) / 2.
std::vector<Review> synth_corpus(const SynthSpec& spec, std::uint64_t seed);

/// Block boundaries of the synthetic vocabulary, exposed for tests and the
/// count-based baseline oracle.
struct SynthBlocks {
  int pos_begin, pos_end;
  int neg_begin, neg_end;
  int fraud_begin, fraud_end;
  int genuine_begin, genuine_end;
};
SynthBlocks synth_blocks(int vocab_size);
std::string synth_token(int index);

}  // namespace scoregan
