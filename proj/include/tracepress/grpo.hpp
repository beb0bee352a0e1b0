#pragma once

#include <vector>

namespace tracepress {

// One group of sibling rewards and their normalized advantages.
struct RewardGroup {
    std::vector<double> rewards;
    std::vector<double> advantages;
};

struct GrpoConfig {
    int group_size = 8;
    double kl_coeff = 0.01;
    double learning_rate = 0.1;
    double epsilon_std = 1e-8;
};

// Per-sentence Bernoulli selection policy: inclusion probability of sentence
// j is sigmoid(logits[j]).
struct SelectionPolicy {
    std::vector<double> logits;
};

// One sampled trajectory of the selection policy.
struct Episode {
    std::vector<int> actions;   // 0/1 per sentence
    double logprob = 0.0;       // log pi(actions) at sampling time
    double advantage = 0.0;
};

// a_i = (r_i - mean) / (population std + epsilon_std); all-equal groups map
// to exact zeros. Throws group_too_small / non_finite_reward.
std::vector<double> group_advantages(const std::vector<double> &rewards, double epsilon_std = 1e-8);

RewardGroup make_reward_group(const std::vector<double> &rewards, double epsilon_std = 1e-8);

// Mean of the nonnegative k3 estimator exp(ref-new) - (ref-new) - 1 over
// positions. Throws length_mismatch / non_finite_logprob.
double kl_to_reference(const std::vector<double> &logp_new, const std::vector<double> &logp_ref);

double sigmoid(double x);

// log pi(actions) for the Bernoulli selection policy.
double episode_logprob(const SelectionPolicy &policy, const std::vector<int> &actions);

// d log pi / d logit_j = action_j - sigmoid(logit_j).
std::vector<double> episode_logprob_grad(const SelectionPolicy &policy,
                                         const std::vector<int> &actions);

// Exact KL(pi || pi_ref) between per-sentence Bernoulli factors, summed over
// positions, and its gradient in the policy's logits.
double bernoulli_kl(const SelectionPolicy &policy, const std::vector<double> &ref_logits);
std::vector<double> bernoulli_kl_grad(const SelectionPolicy &policy,
                                      const std::vector<double> &ref_logits);

// Single ascent step on mean_i advantage_i * log pi(actions_i) minus
// kl_coeff * KL(pi || pi_ref). Throws non_finite_gradient.
SelectionPolicy policy_gradient_step(const SelectionPolicy &policy,
                                     const std::vector<Episode> &episodes, const GrpoConfig &cfg,
                                     const std::vector<double> &ref_logits);

}  // namespace tracepress
