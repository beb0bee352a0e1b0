#include "tracepress/rewards.hpp"

#include <algorithm>
#include <cctype>

#include "tracepress/error.hpp"

namespace tracepress {

namespace {

std::string ascii_lower(const std::string &s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Last non-empty segment after splitting on sentence terminators.
std::string final_sentence(const std::string &text) {
    static const std::string terminators = ".!?\n";
    size_t end = text.size();
    while (end > 0) {
        size_t begin = text.find_last_of(terminators, end - 1);
        size_t seg_begin = (begin == std::string::npos) ? 0 : begin + 1;
        const std::string segment = text.substr(seg_begin, end - seg_begin);
        for (char c : segment) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                return segment;
            }
        }
        if (begin == std::string::npos) {
            break;
        }
        end = begin;
    }
    return "";
}

}  // namespace

double budget_reward(double length, const BudgetGate &gate) {
    const double b = static_cast<double>(gate.budget);
    const double cutoff = b * (1.0 + gate.gamma);
    if (length <= 0.0 || length >= cutoff) {
        return 0.0;
    }
    if (length <= b) {
        return 1.0;
    }
    return 1.0 - (length - b) / (gate.gamma * b);
}

double utility_reward(const ScorePair &score) {
    return std::max(static_cast<double>(score.em), score.f1);
}

bool detect_hack(const std::string &trace_text, const HackRules &rules,
                 const std::vector<std::string> &golds) {
    if (trace_text.empty()) {
        return false;
    }
    const std::string haystack = ascii_lower(trace_text);
    for (const auto &pattern : rules.patterns) {
        if (!pattern.empty() && haystack.find(ascii_lower(pattern)) != std::string::npos) {
            return true;
        }
    }
    if (rules.check_tail_declaration) {
        const std::string tail = final_sentence(trace_text);
        if (!tail.empty()) {
            const auto tail_norm = normalize_answer(tail).tokens;
            if (!tail_norm.empty()) {
                for (const auto &gold : golds) {
                    if (tail_norm == normalize_answer(gold).tokens) {
                        return true;
                    }
                }
            }
        }
    }
    return false;
}

int hack_gate(const std::string &trace_text, const HackRules &rules,
              const std::vector<std::string> &golds) {
    return detect_hack(trace_text, rules, golds) ? 0 : 1;
}

RewardBreakdown combined_reward(int format, double utility, double budget, int gate,
                                const RewardWeights &w) {
    if (format != 0 && format != 1) {
        raise(ErrorCode::out_of_range, "combined_reward: format must be 0 or 1");
    }
    if (utility < 0.0 || utility > 1.0) {
        raise(ErrorCode::out_of_range, "combined_reward: utility outside [0,1]");
    }
    if (budget < 0.0 || budget > 1.0) {
        raise(ErrorCode::out_of_range, "combined_reward: budget outside [0,1]");
    }
    if (gate != 0 && gate != 1) {
        raise(ErrorCode::out_of_range, "combined_reward: hack gate must be 0 or 1");
    }
    if (w.lambda_fmt < 0.0 || w.lambda_utility < 0.0 || w.lambda_fmt + w.lambda_utility > 1.0) {
        raise(ErrorCode::out_of_range, "combined_reward: weights must be nonnegative and sum to <= 1");
    }
    RewardBreakdown out;
    out.format = format;
    out.utility = utility;
    out.budget = budget;
    out.hack_gate = gate;
    out.total = gate * (w.lambda_fmt * format + w.lambda_utility * utility * budget);
    return out;
}

}  // namespace tracepress
