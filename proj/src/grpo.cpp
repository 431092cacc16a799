#include "lexkit/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lexkit/errors.hpp"
#include "lexkit/rng.hpp"

namespace lexkit::grpo {

std::vector<double> advantages(const std::vector<double>& rewards) {
  const std::size_t G = rewards.size();
  if (G < 2) throw GroupTooSmall("advantage normalization needs G >= 2");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= double(G);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= double(G);  // population variance, no Bessel correction
  const double std_dev = std::sqrt(var);
  std::vector<double> out(G, 0.0);
  if (std_dev < 1e-8) return out;
  for (std::size_t i = 0; i < G; ++i) out[i] = (rewards[i] - mean) / std_dev;
  return out;
}

std::vector<int> visited_contexts(const policy::ToyPolicy& pi, const policy::TokenSeq& query,
                                  const std::vector<policy::TokenSeq>& outputs) {
  std::set<int> contexts;
  for (const auto& output : outputs) {
    int ctx = pi.initial_context(query);
    for (int tok : output) {
      contexts.insert(ctx);
      ctx = tok;
    }
  }
  return {contexts.begin(), contexts.end()};
}

namespace {

void check_shared_vocab(const policy::ToyPolicy& a, const policy::ToyPolicy& b) {
  if (a.vocab().tokens() != b.vocab().tokens())
    throw Error("policies do not share a vocabulary");
}

double context_kl(const std::vector<double>& p, const std::vector<double>& log_p,
                  const std::vector<double>& q, const std::vector<double>& log_q) {
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) throw SupportMismatch("reference assigns zero probability");
    kl += p[j] * (log_p[j] - log_q[j]);
  }
  return kl;
}

}  // namespace

double kl_divergence(const policy::ToyPolicy& pi_theta, const policy::ToyPolicy& pi_ref,
                     const std::vector<int>& contexts) {
  check_shared_vocab(pi_theta, pi_ref);
  if (contexts.empty()) return 0.0;
  double total = 0.0;
  for (int ctx : contexts) {
    total += context_kl(pi_theta.prob_row(ctx), pi_theta.log_row(ctx), pi_ref.prob_row(ctx),
                        pi_ref.log_row(ctx));
  }
  return total / double(contexts.size());
}

Objective surrogate(const RolloutGroup& group, const policy::ToyPolicy& pi_theta,
                    const policy::ToyPolicy& pi_ref, const GrpoConfig& config) {
  check_shared_vocab(pi_theta, pi_ref);
  const std::size_t G = group.outputs.size();
  if (G < 2) throw GroupTooSmall("surrogate needs G >= 2");
  if (group.advantages.size() != G || group.old_logps.size() != G)
    throw Error("rollout group is missing advantages or old log-probs");

  const int V = pi_theta.vocab_size();
  Objective out;
  out.grad.assign(std::size_t(V) * std::size_t(V), 0.0);
  const double eps = config.clip;

  double surrogate_sum = 0.0;
  for (std::size_t i = 0; i < G; ++i) {
    const double new_logp = policy::log_prob(pi_theta, group.query, group.outputs[i]);
    const double ratio = std::exp(new_logp - group.old_logps[i]);
    if (!std::isfinite(ratio))
      throw NonFiniteRatio("importance ratio is not finite; old log-probs stale?");
    const double advantage = group.advantages[i];
    const double unclipped = ratio * advantage;
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage;
    surrogate_sum += std::min(unclipped, clipped);

    // The clipped branch is flat in theta, so only the unclipped branch
    // contributes gradient (ties resolve to the unclipped branch).
    if (unclipped <= clipped) {
      const double scale = ratio * advantage / double(G);
      int ctx = pi_theta.initial_context(group.query);
      for (int tok : group.outputs[i]) {
        const auto probs = pi_theta.prob_row(ctx);
        double* grad_row = out.grad.data() + std::size_t(ctx) * std::size_t(V);
        for (int j = 0; j < V; ++j) grad_row[j] -= scale * probs[std::size_t(j)];
        grad_row[tok] += scale;
        ctx = tok;
      }
    }
  }

  const auto contexts = visited_contexts(pi_theta, group.query, group.outputs);
  double kl = 0.0;
  if (!contexts.empty() && config.kl_coef != 0.0) {
    for (int ctx : contexts) {
      const auto p = pi_theta.prob_row(ctx);
      const auto log_p = pi_theta.log_row(ctx);
      const auto q = pi_ref.prob_row(ctx);
      const auto log_q = pi_ref.log_row(ctx);
      const double kl_ctx = context_kl(p, log_p, q, log_q);
      kl += kl_ctx;
      // d KL_ctx / d theta[ctx][j] = p_j * (log p_j - log q_j - KL_ctx)
      const double w = config.kl_coef / double(contexts.size());
      double* grad_row = out.grad.data() + std::size_t(ctx) * std::size_t(V);
      for (int j = 0; j < V; ++j)
        grad_row[j] -= w * p[std::size_t(j)] * (log_p[std::size_t(j)] - log_q[std::size_t(j)] - kl_ctx);
    }
    kl /= double(contexts.size());
  } else if (!contexts.empty()) {
    kl = kl_divergence(pi_theta, pi_ref, contexts);
  }

  out.value = surrogate_sum / double(G) - config.kl_coef * kl;
  if (!std::isfinite(out.value)) throw DivergenceDetected("objective became non-finite");
  return out;
}

std::string GrpoLog::to_csv() const {
  std::ostringstream out;
  out << "step,objective,mean_reward,kl\n";
  out.precision(17);
  for (std::size_t i = 0; i < objective.size(); ++i)
    out << i << ',' << objective[i] << ',' << mean_reward[i] << ',' << kl[i] << '\n';
  return out.str();
}

GrpoLog train_grpo(policy::ToyPolicy& pi_theta, const std::vector<policy::TokenSeq>& queries,
                   const RewardFn& reward_fn, const GrpoConfig& config) {
  if (queries.empty()) throw Error("train_grpo needs at least one query");
  if (config.group_size < 2) throw GroupTooSmall("G must be >= 2");
  if (!(config.clip > 0.0 && config.clip < 1.0)) throw Error("clip radius must be in (0, 1)");
  if (config.kl_coef < 0.0) throw Error("KL coefficient must be >= 0");

  const policy::ToyPolicy pi_ref = pi_theta;  // frozen reference
  GrpoLog log;

  for (int update = 0; update < config.updates; ++update) {
    const policy::ToyPolicy pi_old = pi_theta;  // snapshot for this update
    std::vector<double> step_grad(pi_theta.raw_logits().size(), 0.0);
    double obj_sum = 0.0, reward_sum = 0.0, kl_sum = 0.0;

    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      RolloutGroup group;
      group.query = queries[qi];
      const std::string query_text = pi_old.vocab().decode(group.query);
      for (int i = 0; i < config.group_size; ++i) {
        const std::uint64_t sample_seed =
            derive_seed(config.seed, "rollout") ^ (std::uint64_t(update) << 32) ^
            (std::uint64_t(qi) << 16) ^ std::uint64_t(i);
        auto sampled = policy::sample(pi_old, group.query, config.max_len, sample_seed);
        double old_logp = 0.0;
        for (double lp : sampled.log_probs) old_logp += lp;
        group.outputs.push_back(std::move(sampled.tokens));
        group.old_logps.push_back(old_logp);
        group.rewards.push_back(reward_fn(pi_old.vocab().decode(group.outputs.back()), query_text));
        reward_sum += group.rewards.back();
      }
      group.advantages = advantages(group.rewards);

      const auto obj = surrogate(group, pi_theta, pi_ref, config);
      obj_sum += obj.value;
      kl_sum += kl_divergence(pi_theta, pi_ref,
                              visited_contexts(pi_theta, group.query, group.outputs));
      for (std::size_t k = 0; k < step_grad.size(); ++k) step_grad[k] += obj.grad[k];
    }

    const double nq = double(queries.size());
    auto& logits = pi_theta.raw_logits();
    for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += config.lr * step_grad[k] / nq;

    log.objective.push_back(obj_sum / nq);
    log.mean_reward.push_back(reward_sum / (nq * double(config.group_size)));
    log.kl.push_back(kl_sum / nq);
    if (!std::isfinite(log.objective.back()))
      throw DivergenceDetected("GRPO objective became non-finite");
  }
  return log;
}

}  // namespace lexkit::grpo
