#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracepress/grpo.hpp"
#include "tracepress/rewards.hpp"
#include "tracepress/rng.hpp"

namespace tracepress {

// One synthetic fact-extraction task: a gold fact sentence that answers the
// query, a leak sentence that states the answer outright, and distractors.
struct SyntheticInstance {
    std::vector<std::string> sentences;
    size_t gold_index = 0;
    size_t leak_index = 0;
    std::string query;
    std::string gold_answer;
};

struct SimConfig {
    int steps = 500;
    int group_size = 8;
    size_t budget_tokens = 16;
    double gamma = 0.2;
    RewardWeights weights;
    bool hack_gate_enabled = true;
    bool budget_reward_enabled = true;
    bool utility_reward_enabled = true;
    double learning_rate = 0.25;
    double kl_coeff = 0.01;
    double epsilon_std = 1e-8;
    uint64_t seed = 42;
    int n_distractors = 6;
    int pool_size = 4;
    HackRules hack_rules;
};

// Per-step series over the whole pool x group batch.
struct SimCurves {
    std::vector<double> mean_total_reward;
    std::vector<double> mean_utility;
    std::vector<double> mean_budget_reward;
    std::vector<double> hack_rate;
    std::vector<double> mean_trace_tokens;

    std::string to_csv() const;
};

// One sampled selection with its measured reward components. `total` is the
// training signal and respects the ablation switches; the measured fields
// always reflect the full reward stack.
struct SimEpisode {
    std::vector<int> actions;
    double logprob = 0.0;
    std::string trace_text;
    size_t trace_tokens = 0;
    double utility = 0.0;
    double budget = 0.0;
    bool hacked = false;
    double total = 0.0;
};

// Deterministic instance from the seed; gold and leak positions are uniform
// over slots.
SyntheticInstance synthesize(uint64_t seed, int n_distractors);

// Gold answer iff the gold fact sentence appears verbatim in the trace, or
// the leak sentence does; otherwise "unknown".
std::string rule_answerer(const SyntheticInstance &instance, const std::string &trace_text);

std::vector<SimEpisode> rollout(const SelectionPolicy &policy, const SyntheticInstance &instance,
                                const SimConfig &cfg, Rng &rng);

// Full training loop: rollout -> group advantages -> policy step over a
// fixed pool of instances. Deterministic given the config.
SimCurves train(const SimConfig &cfg);

}  // namespace tracepress
