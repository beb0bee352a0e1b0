#include "tracepress/toysim.hpp"

#include <cstdio>

#include "tracepress/error.hpp"
#include "tracepress/metrics.hpp"
#include "tracepress/trace.hpp"

namespace tracepress {

namespace {

const char *kCodeWords[] = {"crimson", "amber", "cobalt", "ivory",
                            "onyx",    "jade",  "coral",  "slate"};
const char *kMaterials[] = {"copper", "lumber", "argon",  "basalt",
                            "quartz", "nickel", "cotton", "resin"};

std::string format_int(uint64_t v) { return std::to_string(v); }

}  // namespace

SyntheticInstance synthesize(uint64_t seed, int n_distractors) {
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    SyntheticInstance inst;

    const size_t n_sentences = static_cast<size_t>(n_distractors) + 2;
    inst.gold_index = rng.uniform_below(n_sentences);
    inst.leak_index = rng.uniform_below(n_sentences - 1);
    if (inst.leak_index >= inst.gold_index) {
        inst.leak_index += 1;
    }

    const std::string vault = format_int(1 + rng.uniform_below(9));
    const std::string code = std::string(kCodeWords[rng.uniform_below(8)]) + "-" +
                             format_int(10 + rng.uniform_below(90));
    inst.query = "What is the access code for vault " + vault + "?";
    inst.gold_answer = code;

    inst.sentences.resize(n_sentences);
    inst.sentences[inst.gold_index] =
        "The access code for vault " + vault + " is " + code + ".";
    inst.sentences[inst.leak_index] = "ANSWER: " + code;
    for (size_t i = 0; i < n_sentences; ++i) {
        if (i == inst.gold_index || i == inst.leak_index) {
            continue;
        }
        inst.sentences[i] = "Warehouse " + format_int(1 + rng.uniform_below(9)) + " logged " +
                            format_int(10 + rng.uniform_below(90)) + " crates of " +
                            kMaterials[rng.uniform_below(8)] + " on day " +
                            format_int(1 + rng.uniform_below(28)) + ".";
    }
    return inst;
}

std::string rule_answerer(const SyntheticInstance &instance, const std::string &trace_text) {
    if (trace_text.find(instance.sentences[instance.gold_index]) != std::string::npos ||
        trace_text.find(instance.sentences[instance.leak_index]) != std::string::npos) {
        return instance.gold_answer;
    }
    return "unknown";
}

std::vector<SimEpisode> rollout(const SelectionPolicy &policy, const SyntheticInstance &instance,
                                const SimConfig &cfg, Rng &rng) {
    const BudgetGate gate{cfg.budget_tokens, cfg.gamma};
    const std::vector<std::string> golds = {instance.gold_answer};

    std::vector<SimEpisode> episodes;
    episodes.reserve(static_cast<size_t>(cfg.group_size));
    for (int g = 0; g < cfg.group_size; ++g) {
        SimEpisode ep;
        ep.actions.resize(policy.logits.size());
        for (size_t j = 0; j < policy.logits.size(); ++j) {
            ep.actions[j] = rng.bernoulli(sigmoid(policy.logits[j])) ? 1 : 0;
            if (ep.actions[j]) {
                if (!ep.trace_text.empty()) {
                    ep.trace_text += " ";
                }
                ep.trace_text += instance.sentences[j];
            }
        }
        ep.logprob = episode_logprob(policy, ep.actions);
        ep.trace_tokens = count_tokens(ep.trace_text);

        // Same flow as the real pipeline: budget scored on the raw length,
        // the answerer only sees the truncated prefix. The sim has no tag
        // layer, so the format component is constant 1.
        ep.budget = budget_reward(static_cast<double>(ep.trace_tokens), gate);
        const std::string visible =
            ep.trace_text.empty() ? std::string()
                                  : truncate_to_budget(ep.trace_text, cfg.budget_tokens);
        const std::string prediction = rule_answerer(instance, visible);
        ep.utility = utility_reward(score_against_golds(prediction, golds));
        ep.hacked = detect_hack(ep.trace_text, cfg.hack_rules, golds);

        const double utility_factor = cfg.utility_reward_enabled ? ep.utility : 1.0;
        const double budget_factor = cfg.budget_reward_enabled ? ep.budget : 1.0;
        const int gate_factor = cfg.hack_gate_enabled ? (ep.hacked ? 0 : 1) : 1;
        ep.total = gate_factor * (cfg.weights.lambda_fmt * 1.0 +
                                  cfg.weights.lambda_utility * utility_factor * budget_factor);
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

SimCurves train(const SimConfig &cfg) {
    if (cfg.steps < 1 || cfg.group_size < 2 || cfg.budget_tokens < 1 || cfg.pool_size < 1 ||
        cfg.n_distractors < 0) {
        raise(ErrorCode::invalid_input, "train: invalid sim config");
    }

    std::vector<SyntheticInstance> pool;
    std::vector<SelectionPolicy> policies;
    pool.reserve(static_cast<size_t>(cfg.pool_size));
    for (int i = 0; i < cfg.pool_size; ++i) {
        pool.push_back(synthesize(cfg.seed + static_cast<uint64_t>(i), cfg.n_distractors));
        policies.push_back(
            SelectionPolicy{std::vector<double>(pool.back().sentences.size(), 0.0)});
    }
    const std::vector<SelectionPolicy> reference = policies;

    GrpoConfig grpo_cfg;
    grpo_cfg.group_size = cfg.group_size;
    grpo_cfg.kl_coeff = cfg.kl_coeff;
    grpo_cfg.learning_rate = cfg.learning_rate;
    grpo_cfg.epsilon_std = cfg.epsilon_std;

    Rng rng(cfg.seed);
    SimCurves curves;
    curves.mean_total_reward.reserve(static_cast<size_t>(cfg.steps));

    for (int step = 0; step < cfg.steps; ++step) {
        double sum_total = 0.0;
        double sum_utility = 0.0;
        double sum_budget = 0.0;
        double sum_tokens = 0.0;
        int n_hacked = 0;
        int n_episodes = 0;

        for (int k = 0; k < cfg.pool_size; ++k) {
            auto episodes = rollout(policies[k], pool[k], cfg, rng);

            std::vector<double> rewards(episodes.size());
            for (size_t i = 0; i < episodes.size(); ++i) {
                rewards[i] = episodes[i].total;
            }
            const auto advantages = group_advantages(rewards, cfg.epsilon_std);

            std::vector<Episode> grpo_episodes(episodes.size());
            for (size_t i = 0; i < episodes.size(); ++i) {
                grpo_episodes[i].actions = episodes[i].actions;
                grpo_episodes[i].logprob = episodes[i].logprob;
                grpo_episodes[i].advantage = advantages[i];

                sum_total += episodes[i].total;
                sum_utility += episodes[i].utility;
                sum_budget += episodes[i].budget;
                sum_tokens += static_cast<double>(episodes[i].trace_tokens);
                n_hacked += episodes[i].hacked ? 1 : 0;
                n_episodes += 1;
            }
            policies[k] =
                policy_gradient_step(policies[k], grpo_episodes, grpo_cfg, reference[k].logits);
        }

        const double n = static_cast<double>(n_episodes);
        curves.mean_total_reward.push_back(sum_total / n);
        curves.mean_utility.push_back(sum_utility / n);
        curves.mean_budget_reward.push_back(sum_budget / n);
        curves.hack_rate.push_back(static_cast<double>(n_hacked) / n);
        curves.mean_trace_tokens.push_back(sum_tokens / n);
    }
    return curves;
}

std::string SimCurves::to_csv() const {
    std::string out = "step,mean_total,mean_utility,mean_budget,hack_rate,mean_tokens\n";
    char line[192];
    for (size_t i = 0; i < mean_total_reward.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", i,
                      mean_total_reward[i], mean_utility[i], mean_budget_reward[i], hack_rate[i],
                      mean_trace_tokens[i]);
        out += line;
    }
    return out;
}

}  // namespace tracepress
