#include <doctest.h>

#include <cmath>

#include "lexkit/errors.hpp"
#include "lexkit/policy.hpp"
#include "lexkit/rng.hpp"
#include "oracles.hpp"

using namespace lexkit;
using policy::Dataset;
using policy::TokenSeq;
using policy::ToyPolicy;
using policy::Vocab;

namespace {

Vocab toy_vocab(int size) {
  std::vector<std::string> tokens = {policy::kBosToken, policy::kEosToken};
  for (int i = 2; i < size; ++i) tokens.push_back("t" + std::to_string(i));
  return Vocab::from_tokens(std::move(tokens));
}

ToyPolicy random_policy(int vocab_size, std::uint64_t seed, double scale = 1.0) {
  ToyPolicy p(toy_vocab(vocab_size));
  Rng rng(seed);
  for (double& logit : p.raw_logits()) logit = scale * (rng.next_double() * 2.0 - 1.0);
  return p;
}

// A deterministic bigram chain: token i deterministically followed by succ[i].
ToyPolicy chain_policy(int vocab_size, const std::vector<int>& succ) {
  ToyPolicy p(toy_vocab(vocab_size));
  for (int prev = 0; prev < vocab_size; ++prev) p.set_logit(prev, succ[std::size_t(prev)], 1000.0);
  return p;
}

}  // namespace

TEST_CASE("vocab requires markers and distinct tokens") {
  CHECK_THROWS_AS(Vocab::from_tokens({"a", "b"}), Error);
  CHECK_THROWS_AS(Vocab::from_tokens({policy::kBosToken, policy::kEosToken, "a", "a"}), Error);
  const auto v = toy_vocab(4);
  CHECK(v.size() == 4);
  CHECK_THROWS_AS(v.id("missing"), UnknownToken);
}

TEST_CASE("log_prob of a certain policy is zero nats") {
  std::vector<int> succ(8);
  for (int i = 0; i < 8; ++i) succ[std::size_t(i)] = (i + 1) % 8;
  const auto p = chain_policy(8, succ);
  const TokenSeq x = {2};
  const TokenSeq y = {3, 4, 5};
  CHECK(policy::log_prob(p, x, y) == 0.0);
}

TEST_CASE("log_prob of the uniform policy is -T ln V") {
  const ToyPolicy p(toy_vocab(64));
  const TokenSeq x = {5};
  const TokenSeq y = {7, 8, 9};
  const double lp = policy::log_prob(p, x, y);
  CHECK(lp == doctest::Approx(-3.0 * std::log(64.0)).epsilon(1e-14));
  CHECK(lp == doctest::Approx(-12.4766).epsilon(1e-4));
}

TEST_CASE("log_prob rejects out-of-vocab tokens") {
  const ToyPolicy p(toy_vocab(8));
  CHECK_THROWS_AS(policy::log_prob(p, {2}, {99}), UnknownToken);
}

TEST_CASE("rows stay normalized after updates") {
  auto p = random_policy(16, 3);
  Dataset data = {{{2}, {3, 4}}, {{5}, {6}}};
  policy::train_sft(p, data, 50, 0.2, 2);
  for (int ctx = 0; ctx < p.vocab_size(); ++ctx) {
    double sum = 0.0;
    for (double prob : p.prob_row(ctx)) sum += prob;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("sft_loss at the minimum has zero loss and gradient") {
  std::vector<int> succ(8);
  for (int i = 0; i < 8; ++i) succ[std::size_t(i)] = (i + 1) % 8;
  const auto p = chain_policy(8, succ);
  const Dataset data = {{{2}, {3, 4, 5}}};
  const auto lg = policy::sft_loss(p, data);
  CHECK(lg.loss == 0.0);
  for (double g : lg.grad) CHECK(g == 0.0);
}

TEST_CASE("sft_loss at uniform init is exactly T ln V") {
  const ToyPolicy p(toy_vocab(16));
  const Dataset data = {{{2}, {3, 4}}};  // T = 2
  const auto lg = policy::sft_loss(p, data);
  CHECK(lg.loss == 2.0 * std::log(16.0));
}

TEST_CASE("sft_loss empty dataset throws") {
  const ToyPolicy p(toy_vocab(8));
  CHECK_THROWS_AS(policy::sft_loss(p, {}), EmptyDataset);
}

TEST_CASE("analytic sft gradient matches finite differences") {
  auto p = random_policy(8, 17);
  const Dataset data = {{{2}, {3, 4, 5}}, {{6}, {7, 2}}, {{}, {4, 4, 6}}};
  const auto analytic = policy::sft_loss(p, data);
  const auto objective = [&](const std::vector<double>& theta) {
    ToyPolicy q = p;
    q.raw_logits() = theta;
    return policy::sft_loss(q, data).loss;
  };
  const auto fd = oracles::finite_difference(objective, p.raw_logits(), 1e-5);
  CHECK(oracles::max_rel_error(analytic.grad, fd) < 1e-4);
}

namespace {

// 10 pairs generated by a single global successor function, so one bigram
// table can fit every pair exactly.
Dataset memorizable_corpus(const Vocab& vocab, std::uint64_t seed) {
  Rng rng(seed);
  const int V = vocab.size();
  std::vector<int> succ(static_cast<std::size_t>(V));
  for (int i = 0; i < V; ++i) succ[std::size_t(i)] = 2 + int(rng.next_below(std::uint64_t(V - 2)));
  Dataset data;
  for (int k = 0; k < 10; ++k) {
    const int start = 2 + (k % (V - 2));
    TokenSeq y;
    int cur = start;
    const int len = 4 + int(rng.next_below(4));
    for (int t = 0; t < len; ++t) {
      cur = succ[std::size_t(cur)];
      y.push_back(cur);
    }
    data.push_back({{start}, y});
  }
  return data;
}

std::size_t total_tokens(const Dataset& data) {
  std::size_t n = 0;
  for (const auto& [x, y] : data) n += y.size();
  return n;
}

}  // namespace

TEST_CASE("train_sft memorizes a memorizable corpus") {
  ToyPolicy p(toy_vocab(16));
  const auto data = memorizable_corpus(p.vocab(), 23);
  const auto log = policy::train_sft(p, data, 2000, 0.5, 1);
  const double mean_loss = log.loss.back() / double(total_tokens(data));
  CHECK(mean_loss < 0.05);
}

TEST_CASE("train_sft with lr=0 keeps the loss constant") {
  ToyPolicy p(toy_vocab(12));
  const auto data = memorizable_corpus(p.vocab(), 5);
  const auto log = policy::train_sft(p, data, 20, 0.0, 3);
  for (double loss : log.loss) CHECK(loss == log.loss.front());
}

TEST_CASE("train_sft is deterministic") {
  const auto data = memorizable_corpus(toy_vocab(12), 9);
  ToyPolicy p1(toy_vocab(12)), p2(toy_vocab(12));
  const auto log1 = policy::train_sft(p1, data, 100, 0.3, 4);
  const auto log2 = policy::train_sft(p2, data, 100, 0.3, 4);
  CHECK(log1.loss == log2.loss);
  CHECK(log1.grad_norm == log2.grad_norm);
  CHECK(p1.raw_logits() == p2.raw_logits());
}

TEST_CASE("training loss is non-increasing over 100-step windows for small lr") {
  ToyPolicy p(toy_vocab(16));
  const auto data = memorizable_corpus(p.vocab(), 31);
  const auto log = policy::train_sft(p, data, 600, 0.1, 1);
  for (std::size_t k = 0; k + 100 < log.loss.size(); ++k)
    CHECK(log.loss[k + 100] <= log.loss[k] + 1e-12);
}

TEST_CASE("grad_accum averages the gradient") {
  const auto data = memorizable_corpus(toy_vocab(12), 13);
  ToyPolicy p1(toy_vocab(12)), p2(toy_vocab(12));
  // One step with accum=2 equals one step at half the learning rate.
  policy::train_sft(p1, data, 1, 0.4, 2);
  policy::train_sft(p2, data, 1, 0.2, 1);
  REQUIRE(p1.raw_logits().size() == p2.raw_logits().size());
  for (std::size_t i = 0; i < p1.raw_logits().size(); ++i)
    CHECK(p1.raw_logits()[i] == doctest::Approx(p2.raw_logits()[i]).epsilon(1e-12));
}

TEST_CASE("sample from a deterministic policy ignores the seed") {
  std::vector<int> succ(8, 0);
  for (int i = 0; i < 8; ++i) succ[std::size_t(i)] = i == 5 ? 1 : i + 1;  // 5 -> EOS
  const auto p = chain_policy(8, succ);
  const auto s1 = policy::sample(p, {2}, 10, 1);
  const auto s2 = policy::sample(p, {2}, 10, 999);
  CHECK(s1.tokens == s2.tokens);
  CHECK(s1.tokens == TokenSeq{3, 4, 5, 1});  // walks the chain into EOS
}

TEST_CASE("sampled log-probs match log_prob recomputation") {
  const auto p = random_policy(16, 41);
  const auto s = policy::sample(p, {3}, 12, 7);
  double total = 0.0;
  for (double lp : s.log_probs) total += lp;
  CHECK(total == doctest::Approx(policy::log_prob(p, {3}, s.tokens)).epsilon(1e-12));
}

TEST_CASE("sampling is seed-deterministic") {
  const auto p = random_policy(16, 42);
  const auto s1 = policy::sample(p, {}, 12, 123);
  const auto s2 = policy::sample(p, {}, 12, 123);
  CHECK(s1.tokens == s2.tokens);
  CHECK(s1.log_probs == s2.log_probs);
}

TEST_CASE("checkpoint round trip preserves the policy") {
  const auto p = random_policy(12, 77);
  const std::string path = "/tmp/lexkit_test_ckpt.json";
  p.save(path);
  const auto loaded = ToyPolicy::load(path);
  CHECK(loaded.vocab().tokens() == p.vocab().tokens());
  CHECK(loaded.raw_logits() == p.raw_logits());
}

TEST_CASE("vocab from corpus builds char-level tokens") {
  const auto v = Vocab::from_corpus({"大家好", "abc"});
  CHECK(v.contains("大"));
  CHECK(v.contains("a"));
  const auto seq = v.encode("大好x");  // x unseen -> skipped
  CHECK(seq.size() == 2);
  CHECK(v.decode(seq) == "大好");
}

TEST_CASE("train divergence detection") {
  ToyPolicy p(toy_vocab(8));
  p.set_logit(2, 3, std::numeric_limits<double>::quiet_NaN());
  const Dataset data = {{{2}, {3}}};
  CHECK_THROWS_AS(policy::train_sft(p, data, 5, 0.1, 1), DivergenceDetected);
}
