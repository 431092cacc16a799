#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lexkit/policy.hpp"

namespace lexkit::grpo {

struct RolloutGroup {
  policy::TokenSeq query;
  std::vector<policy::TokenSeq> outputs;  // sampled from the frozen old policy
  std::vector<double> old_logps;          // sequence log-probs under the old policy
  std::vector<double> rewards;
  std::vector<double> advantages;
};

struct GrpoConfig {
  int group_size = 8;     // G
  double clip = 0.2;      // epsilon
  double kl_coef = 0.01;  // beta
  double lr = 0.1;
  int updates = 1000;
  int max_len = 12;
  std::uint64_t seed = 0;
};

// Group-normalized advantages: (r - mean) / population std. Degenerate groups
// (std below 1e-8) map to all zeros. Throws GroupTooSmall for fewer than two.
std::vector<double> advantages(const std::vector<double>& rewards);

// Distinct conditioning contexts visited when producing `outputs` for `query`,
// sorted ascending.
std::vector<int> visited_contexts(const policy::ToyPolicy& pi, const policy::TokenSeq& query,
                                  const std::vector<policy::TokenSeq>& outputs);

// Exact forward KL summed over the vocabulary at each context, averaged over
// contexts. Throws SupportMismatch when the reference assigns zero probability
// where the trained policy does not.
double kl_divergence(const policy::ToyPolicy& pi_theta, const policy::ToyPolicy& pi_ref,
                     const std::vector<int>& contexts);

struct Objective {
  double value = 0.0;
  std::vector<double> grad;  // d objective / d theta logits (ascent direction)
};

// Clipped-ratio surrogate with KL regularization:
//   (1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) - beta * KL
// where rho_i compares pi_theta against the recorded old log-probs. The KL term
// is taken against pi_ref at the group's visited contexts.
Objective surrogate(const RolloutGroup& group, const policy::ToyPolicy& pi_theta,
                    const policy::ToyPolicy& pi_ref, const GrpoConfig& config);

// Reward over (decoded output, decoded query).
using RewardFn = std::function<double(const std::string&, const std::string&)>;

struct GrpoLog {
  std::vector<double> objective;
  std::vector<double> mean_reward;
  std::vector<double> kl;

  // CSV with header step,objective,mean_reward,kl.
  std::string to_csv() const;
};

// GRPO loop: snapshot pi_old, sample G outputs per query, score, normalize
// advantages, and ascend the surrogate (one update per snapshot). pi_ref is
// frozen to the initial policy.
GrpoLog train_grpo(policy::ToyPolicy& pi_theta, const std::vector<policy::TokenSeq>& queries,
                   const RewardFn& reward_fn, const GrpoConfig& config);

}  // namespace lexkit::grpo
