#pragma once

#include <string>
#include <vector>

namespace tracepress {

// Answer text after QA normalization: lowercased, punctuation stripped,
// articles ("a", "an", "the") dropped, whitespace-split.
struct NormalizedAnswer {
    std::vector<std::string> tokens;
};

struct ScorePair {
    int em = 0;      // exact match, 0 or 1
    double f1 = 0.0; // token-level F1 in [0, 1]
};

NormalizedAnswer normalize_answer(const std::string &text);

int exact_match(const std::string &pred, const std::string &gold);

// Bag-of-tokens F1 with multiset intersection. Both sides empty after
// normalization scores 1, exactly one side empty scores 0.
double token_f1(const std::string &pred, const std::string &gold);

// Best EM and best F1 over all gold aliases. Throws empty_gold_list.
ScorePair score_against_golds(const std::string &pred, const std::vector<std::string> &golds);

}  // namespace tracepress
