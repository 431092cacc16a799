#include "lexkit/policy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lexkit/errors.hpp"
#include "lexkit/jsonl.hpp"
#include "lexkit/rng.hpp"
#include "lexkit/text.hpp"

namespace lexkit::policy {

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_ = std::move(tokens);
  if (v.tokens_.size() > kMaxVocab) throw Error("vocab exceeds maximum size");
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], int(i)).second)
      throw Error("duplicate vocab token: " + v.tokens_[i]);
  }
  auto bos = v.index_.find(kBosToken);
  auto eos = v.index_.find(kEosToken);
  if (bos == v.index_.end() || eos == v.index_.end())
    throw Error("vocab must contain begin and end markers");
  v.bos_ = bos->second;
  v.eos_ = eos->second;
  return v;
}

Vocab Vocab::from_corpus(const std::vector<std::string>& texts, std::size_t max_size) {
  std::vector<std::string> tokens = {kBosToken, kEosToken};
  std::set<std::string> seen(tokens.begin(), tokens.end());
  for (const auto& text_item : texts) {
    for (char32_t cp : text::codepoints(text_item)) {
      if (tokens.size() >= max_size) break;
      auto tok = text::encode_utf8(cp);
      if (seen.insert(tok).second) tokens.push_back(std::move(tok));
    }
  }
  return from_tokens(std::move(tokens));
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw UnknownToken("unknown token: " + token);
  return it->second;
}

bool Vocab::contains(const std::string& token) const { return index_.count(token) > 0; }

TokenSeq Vocab::encode(const std::string& text_in) const {
  TokenSeq out;
  for (char32_t cp : text::codepoints(text_in)) {
    auto it = index_.find(text::encode_utf8(cp));
    if (it != index_.end()) out.push_back(it->second);
  }
  return out;
}

std::string Vocab::decode(const TokenSeq& seq) const {
  std::string out;
  for (int id : seq) {
    if (id == bos_ || id == eos_) continue;
    out += token(id);
  }
  return out;
}

ToyPolicy::ToyPolicy(Vocab vocab) : vocab_(std::move(vocab)) {
  logits_.assign(std::size_t(vocab_.size()) * std::size_t(vocab_.size()), 0.0);
}

std::vector<double> ToyPolicy::log_row(int prev) const {
  const int V = vocab_.size();
  if (prev < 0 || prev >= V) throw UnknownToken("context id out of range");
  std::vector<double> out(static_cast<std::size_t>(V));
  const double* row = logits_.data() + idx(prev, 0);
  double max_logit = row[0];
  for (int j = 1; j < V; ++j) max_logit = std::max(max_logit, row[j]);
  double sum = 0.0;
  for (int j = 0; j < V; ++j) sum += std::exp(row[j] - max_logit);
  const double lse = max_logit + std::log(sum);
  for (int j = 0; j < V; ++j) out[std::size_t(j)] = row[j] - lse;
  return out;
}

std::vector<double> ToyPolicy::prob_row(int prev) const {
  auto out = log_row(prev);
  for (double& v : out) v = std::exp(v);
  return out;
}

int ToyPolicy::initial_context(const TokenSeq& x) const {
  if (x.empty()) return vocab_.bos();
  const int last = x.back();
  if (last < 0 || last >= vocab_.size()) throw UnknownToken("token id out of range");
  return last;
}

void ToyPolicy::save(const std::string& path) const {
  Json j;
  j["version"] = 1;
  j["vocab"] = vocab_.tokens();
  const int V = vocab_.size();
  Json rows = Json::array();
  for (int p = 0; p < V; ++p) {
    Json row = Json::array();
    for (int n = 0; n < V; ++n) row.push_back(logit(p, n));
    rows.push_back(std::move(row));
  }
  j["logits"] = std::move(rows);
  write_file(path, j.dump());
}

ToyPolicy ToyPolicy::load(const std::string& path) {
  const auto j = Json::parse(read_file(path));
  if (j.value("version", 0) != 1) throw Error("unsupported checkpoint version in " + path);
  ToyPolicy policy(Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>()));
  const auto& rows = j.at("logits");
  const int V = policy.vocab_size();
  if (int(rows.size()) != V) throw Error("checkpoint logits shape mismatch");
  for (int p = 0; p < V; ++p) {
    const auto& row = rows[std::size_t(p)];
    if (int(row.size()) != V) throw Error("checkpoint logits shape mismatch");
    for (int n = 0; n < V; ++n) policy.set_logit(p, n, row[std::size_t(n)].get<double>());
  }
  return policy;
}

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "step,loss,grad_norm\n";
  out.precision(17);
  for (std::size_t i = 0; i < loss.size(); ++i)
    out << i << ',' << loss[i] << ',' << grad_norm[i] << '\n';
  return out.str();
}

namespace {

void check_tokens(const ToyPolicy& policy, const TokenSeq& seq) {
  for (int id : seq)
    if (id < 0 || id >= policy.vocab_size()) throw UnknownToken("token id out of range");
}

}  // namespace

double log_prob(const ToyPolicy& policy, const TokenSeq& x, const TokenSeq& y) {
  check_tokens(policy, x);
  check_tokens(policy, y);
  double total = 0.0;
  int ctx = policy.initial_context(x);
  for (int id : y) {
    total += policy.log_row(ctx)[std::size_t(id)];
    ctx = id;
  }
  return total;
}

double LossGrad::grad_l2() const {
  double s = 0.0;
  for (double g : grad) s += g * g;
  return std::sqrt(s);
}

LossGrad sft_loss(const ToyPolicy& policy, const Dataset& dataset) {
  if (dataset.empty()) throw EmptyDataset("sft_loss requires a non-empty dataset");
  const int V = policy.vocab_size();
  LossGrad out;
  out.grad.assign(std::size_t(V) * std::size_t(V), 0.0);

  // Each visited row's log-softmax and softmax, computed once.
  std::unordered_map<int, std::pair<std::vector<double>, std::vector<double>>> row_cache;
  auto rows_for = [&](int ctx) -> const std::pair<std::vector<double>, std::vector<double>>& {
    auto it = row_cache.find(ctx);
    if (it == row_cache.end()) {
      auto log_row = policy.log_row(ctx);
      std::vector<double> probs(log_row.size());
      for (std::size_t j = 0; j < log_row.size(); ++j) probs[j] = std::exp(log_row[j]);
      it = row_cache.emplace(ctx, std::make_pair(std::move(log_row), std::move(probs))).first;
    }
    return it->second;
  };

  for (const auto& [x, y] : dataset) {
    check_tokens(policy, x);
    check_tokens(policy, y);
    int ctx = policy.initial_context(x);
    for (int target : y) {
      const auto& [log_row, probs] = rows_for(ctx);
      out.loss -= log_row[std::size_t(target)];
      double* grad_row = out.grad.data() + std::size_t(ctx) * std::size_t(V);
      for (int j = 0; j < V; ++j) grad_row[j] += probs[std::size_t(j)];
      grad_row[target] -= 1.0;
      ctx = target;
    }
  }
  return out;
}

TrainLog train_sft(ToyPolicy& policy, const Dataset& dataset, int steps, double lr,
                   int grad_accum) {
  if (steps < 1) throw Error("steps must be >= 1");
  if (grad_accum < 1) throw Error("grad_accum must be >= 1");
  if (dataset.empty()) throw EmptyDataset("train_sft requires a non-empty dataset");

  TrainLog log;
  log.loss.reserve(std::size_t(steps));
  log.grad_norm.reserve(std::size_t(steps));
  for (int step = 0; step < steps; ++step) {
    // Round-robin micro-batches cover the full dataset each step, so the
    // averaged gradient equals the dataset gradient divided by grad_accum.
    auto lg = sft_loss(policy, dataset);
    if (!std::isfinite(lg.loss)) throw DivergenceDetected("loss became non-finite");
    for (double& g : lg.grad) g /= double(grad_accum);
    log.loss.push_back(lg.loss);
    log.grad_norm.push_back(lg.grad_l2());
    auto& logits = policy.raw_logits();
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] -= lr * lg.grad[i];
  }
  return log;
}

SampleResult sample(const ToyPolicy& policy, const TokenSeq& x, int max_len, std::uint64_t seed) {
  if (max_len < 1) throw Error("max_len must be >= 1");
  check_tokens(policy, x);
  Rng rng(seed);
  SampleResult result;
  int ctx = policy.initial_context(x);
  for (int t = 0; t < max_len; ++t) {
    const auto probs = policy.prob_row(ctx);
    const int tok = int(rng.next_categorical(probs));
    result.tokens.push_back(tok);
    result.log_probs.push_back(policy.log_row(ctx)[std::size_t(tok)]);
    if (tok == policy.vocab().eos()) break;
    ctx = tok;
  }
  return result;
}

}  // namespace lexkit::policy
