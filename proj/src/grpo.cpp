#include "tracepress/grpo.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "tracepress/error.hpp"

namespace tracepress {

std::vector<double> group_advantages(const std::vector<double> &rewards, double epsilon_std) {
    if (rewards.size() < 2) {
        raise(ErrorCode::group_too_small, "group_advantages: need at least 2 rewards, got " +
                                              std::to_string(rewards.size()));
    }
    for (double r : rewards) {
        if (!std::isfinite(r)) {
            raise(ErrorCode::non_finite_reward, "group_advantages: non-finite reward");
        }
    }

    const auto n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) {
        mean += r;
    }
    mean /= n;

    bool all_equal = true;
    for (double r : rewards) {
        if (r != rewards.front()) {
            all_equal = false;
            break;
        }
    }
    if (all_equal) {
        return std::vector<double>(rewards.size(), 0.0);
    }

    double var = 0.0;
    for (double r : rewards) {
        var += (r - mean) * (r - mean);
    }
    var /= n; // population variance: the group is the whole population
    const double denom = std::sqrt(var) + epsilon_std;

    std::vector<double> advantages(rewards.size());
    for (size_t i = 0; i < rewards.size(); ++i) {
        advantages[i] = (rewards[i] - mean) / denom;
    }
    return advantages;
}

RewardGroup make_reward_group(const std::vector<double> &rewards, double epsilon_std) {
    RewardGroup group;
    group.rewards = rewards;
    group.advantages = group_advantages(rewards, epsilon_std);
    return group;
}

double kl_to_reference(const std::vector<double> &logp_new, const std::vector<double> &logp_ref) {
    if (logp_new.size() != logp_ref.size()) {
        raise(ErrorCode::length_mismatch, "kl_to_reference: length mismatch " +
                                              std::to_string(logp_new.size()) + " vs " +
                                              std::to_string(logp_ref.size()));
    }
    if (logp_new.empty()) {
        raise(ErrorCode::length_mismatch, "kl_to_reference: empty input");
    }
    double sum = 0.0;
    for (size_t i = 0; i < logp_new.size(); ++i) {
        if (!std::isfinite(logp_new[i]) || !std::isfinite(logp_ref[i])) {
            raise(ErrorCode::non_finite_logprob, "kl_to_reference: non-finite log prob");
        }
        const double d = logp_ref[i] - logp_new[i];
        sum += std::exp(d) - d - 1.0;
    }
    return sum / static_cast<double>(logp_new.size());
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// log sigmoid(x), stable for large negative x.
double log_sigmoid(double x) {
    if (x >= 0.0) {
        return -std::log1p(std::exp(-x));
    }
    return x - std::log1p(std::exp(x));
}

}  // namespace

double episode_logprob(const SelectionPolicy &policy, const std::vector<int> &actions) {
    if (actions.size() != policy.logits.size()) {
        raise(ErrorCode::length_mismatch, "episode_logprob: actions/logits length mismatch");
    }
    double lp = 0.0;
    for (size_t j = 0; j < actions.size(); ++j) {
        // log P(a) = log sigmoid(logit) if a = 1 else log sigmoid(-logit)
        lp += log_sigmoid(actions[j] == 1 ? policy.logits[j] : -policy.logits[j]);
    }
    return lp;
}

std::vector<double> episode_logprob_grad(const SelectionPolicy &policy,
                                         const std::vector<int> &actions) {
    if (actions.size() != policy.logits.size()) {
        raise(ErrorCode::length_mismatch, "episode_logprob_grad: actions/logits length mismatch");
    }
    std::vector<double> grad(actions.size());
    for (size_t j = 0; j < actions.size(); ++j) {
        grad[j] = static_cast<double>(actions[j]) - sigmoid(policy.logits[j]);
    }
    return grad;
}

double bernoulli_kl(const SelectionPolicy &policy, const std::vector<double> &ref_logits) {
    if (ref_logits.size() != policy.logits.size()) {
        raise(ErrorCode::length_mismatch, "bernoulli_kl: logits length mismatch");
    }
    double kl = 0.0;
    for (size_t j = 0; j < policy.logits.size(); ++j) {
        const double p = sigmoid(policy.logits[j]);
        // KL(Bern(p) || Bern(q)) written through log-sigmoids for stability
        kl += p * (log_sigmoid(policy.logits[j]) - log_sigmoid(ref_logits[j])) +
              (1.0 - p) * (log_sigmoid(-policy.logits[j]) - log_sigmoid(-ref_logits[j]));
    }
    return kl;
}

std::vector<double> bernoulli_kl_grad(const SelectionPolicy &policy,
                                      const std::vector<double> &ref_logits) {
    if (ref_logits.size() != policy.logits.size()) {
        raise(ErrorCode::length_mismatch, "bernoulli_kl_grad: logits length mismatch");
    }
    std::vector<double> grad(policy.logits.size());
    for (size_t j = 0; j < policy.logits.size(); ++j) {
        const double p = sigmoid(policy.logits[j]);
        // dKL/dp = logit - ref_logit, dp/dlogit = p(1-p)
        grad[j] = p * (1.0 - p) * (policy.logits[j] - ref_logits[j]);
    }
    return grad;
}

SelectionPolicy policy_gradient_step(const SelectionPolicy &policy,
                                     const std::vector<Episode> &episodes, const GrpoConfig &cfg,
                                     const std::vector<double> &ref_logits) {
    std::vector<double> grad(policy.logits.size(), 0.0);
    for (const auto &ep : episodes) {
        const auto g = episode_logprob_grad(policy, ep.actions);
        for (size_t j = 0; j < grad.size(); ++j) {
            grad[j] += ep.advantage * g[j];
        }
    }
    if (!episodes.empty()) {
        for (double &g : grad) {
            g /= static_cast<double>(episodes.size());
        }
    }
    if (cfg.kl_coeff > 0.0) {
        const auto kl_grad = bernoulli_kl_grad(policy, ref_logits);
        for (size_t j = 0; j < grad.size(); ++j) {
            grad[j] -= cfg.kl_coeff * kl_grad[j];
        }
    }

    SelectionPolicy updated = policy;
    for (size_t j = 0; j < grad.size(); ++j) {
        if (!std::isfinite(grad[j])) {
            raise(ErrorCode::non_finite_gradient, "policy_gradient_step: non-finite gradient");
        }
        updated.logits[j] += cfg.learning_rate * grad[j];
    }
    return updated;
}

}  // namespace tracepress
