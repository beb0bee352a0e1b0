#pragma once

#include <string>
#include <vector>

#include "tracepress/metrics.hpp"

namespace tracepress {

// Soft budget gate: full reward up to `budget` tokens, linear decay to zero
// at budget * (1 + gamma).
struct BudgetGate {
    size_t budget = 1;
    double gamma = 0.2;
};

struct RewardWeights {
    double lambda_fmt = 0.05;
    double lambda_utility = 0.95;
};

// Rule-based shortcut detection. Pattern hits are case-insensitive substring
// matches; the tail rule fires when the trace's final sentence is nothing
// but a gold answer.
struct HackRules {
    std::vector<std::string> patterns = {"the answer is", "final answer", "answer:"};
    bool check_tail_declaration = true;
};

struct RewardBreakdown {
    int format = 0;
    double utility = 0.0;
    double budget = 0.0;
    int hack_gate = 1;
    double total = 0.0;
};

// Piecewise budget reward. `length` is real-valued so the breakpoints can be
// probed exactly; token counts convert losslessly.
double budget_reward(double length, const BudgetGate &gate);

double utility_reward(const ScorePair &score);

bool detect_hack(const std::string &trace_text, const HackRules &rules,
                 const std::vector<std::string> &golds);

int hack_gate(const std::string &trace_text, const HackRules &rules,
              const std::vector<std::string> &golds);

// total = gate * (lambda_fmt * format + lambda_utility * utility * budget).
// Throws out_of_range when a component leaves its stated range.
RewardBreakdown combined_reward(int format, double utility, double budget, int gate,
                                const RewardWeights &w);

}  // namespace tracepress
