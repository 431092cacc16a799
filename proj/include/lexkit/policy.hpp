#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lexkit::policy {

inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr std::size_t kMaxVocab = 4096;

using TokenSeq = std::vector<int>;

class Vocab {
 public:
  // Tokens must be distinct and include the begin/end markers.
  static Vocab from_tokens(std::vector<std::string> tokens);
  // Character-level vocab over a corpus, markers prepended, capped at max_size.
  static Vocab from_corpus(const std::vector<std::string>& texts,
                           std::size_t max_size = kMaxVocab);

  int size() const { return static_cast<int>(tokens_.size()); }
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  const std::string& token(int id) const { return tokens_[std::size_t(id)]; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int id(const std::string& token) const;  // throws UnknownToken
  bool contains(const std::string& token) const;

  // Character-level encode; unknown characters are skipped.
  TokenSeq encode(const std::string& text) const;
  // Concatenates token strings, skipping the markers.
  std::string decode(const TokenSeq& seq) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int bos_ = -1;
  int eos_ = -1;
};

// First-order autoregressive categorical model: a V x V table of logits where
// row `prev` holds the unnormalized log-probabilities of the next token.
class ToyPolicy {
 public:
  explicit ToyPolicy(Vocab vocab);  // uniform rows (all-zero logits)

  const Vocab& vocab() const { return vocab_; }
  int vocab_size() const { return vocab_.size(); }

  double logit(int prev, int next) const { return logits_[idx(prev, next)]; }
  void set_logit(int prev, int next, double v) { logits_[idx(prev, next)] = v; }
  std::vector<double>& raw_logits() { return logits_; }
  const std::vector<double>& raw_logits() const { return logits_; }

  std::vector<double> log_row(int prev) const;   // log-softmax of a row
  std::vector<double> prob_row(int prev) const;  // softmax of a row

  // Context for the first output step: last token of x, or BOS when x is empty.
  int initial_context(const TokenSeq& x) const;

  void save(const std::string& path) const;
  static ToyPolicy load(const std::string& path);

 private:
  std::size_t idx(int prev, int next) const {
    return std::size_t(prev) * std::size_t(vocab_.size()) + std::size_t(next);
  }
  Vocab vocab_;
  std::vector<double> logits_;
};

struct TrainLog {
  std::vector<double> loss;
  std::vector<double> grad_norm;

  // CSV with header step,loss,grad_norm.
  std::string to_csv() const;
};

using Dataset = std::vector<std::pair<TokenSeq, TokenSeq>>;

// Sum over target steps of log P(y_t | context). Throws UnknownToken for ids
// outside the vocab.
double log_prob(const ToyPolicy& policy, const TokenSeq& x, const TokenSeq& y);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits, same layout as raw_logits()

  double grad_l2() const;
};

// Summed cross-entropy over the dataset with its exact analytic gradient.
LossGrad sft_loss(const ToyPolicy& policy, const Dataset& dataset);

// Plain gradient descent. Each step partitions the dataset round-robin into
// grad_accum micro-batches, averages their gradients, and applies one update;
// the logged loss is the full-dataset objective before the update.
TrainLog train_sft(ToyPolicy& policy, const Dataset& dataset, int steps, double lr,
                   int grad_accum);

struct SampleResult {
  TokenSeq tokens;               // ends with EOS when sampled before max_len
  std::vector<double> log_probs;  // per-step, matches log_prob recomputation
};

// Ancestral sampling until the end marker or max_len tokens.
SampleResult sample(const ToyPolicy& policy, const TokenSeq& x, int max_len, std::uint64_t seed);

}  // namespace lexkit::policy
