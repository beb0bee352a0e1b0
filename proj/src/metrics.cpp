#include "tracepress/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "tracepress/error.hpp"
#include "tracepress/unicode_punct.hpp"
#include "tracepress/utf8.hpp"

namespace tracepress {

namespace {

bool is_ascii_space(uint32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v';
}

bool is_article(const std::string &token) {
    return token == "a" || token == "an" || token == "the";
}

}  // namespace

NormalizedAnswer normalize_answer(const std::string &text) {
    // Lowercase (ASCII case fold) and drop punctuation character-wise, then
    // split on whitespace. Articles are removed token-wise so "the" inside
    // a longer word survives.
    std::vector<std::string> tokens;
    std::string current;
    for (uint32_t cp : utf8_decode(text)) {
        if (is_ascii_space(cp)) {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
            continue;
        }
        if (is_punct_codepoint(cp)) {
            continue;
        }
        if (cp >= 'A' && cp <= 'Z') {
            cp = cp - 'A' + 'a';
        }
        utf8_append(current, cp);
    }
    if (!current.empty()) {
        tokens.push_back(current);
    }

    NormalizedAnswer out;
    out.tokens.reserve(tokens.size());
    for (auto &t : tokens) {
        if (!is_article(t)) {
            out.tokens.push_back(std::move(t));
        }
    }
    return out;
}

int exact_match(const std::string &pred, const std::string &gold) {
    return normalize_answer(pred).tokens == normalize_answer(gold).tokens ? 1 : 0;
}

double token_f1(const std::string &pred, const std::string &gold) {
    const auto p = normalize_answer(pred).tokens;
    const auto g = normalize_answer(gold).tokens;
    if (p.empty() && g.empty()) {
        return 1.0;
    }
    if (p.empty() || g.empty()) {
        return 0.0;
    }

    std::unordered_map<std::string, int> gold_counts;
    for (const auto &t : g) {
        gold_counts[t] += 1;
    }
    int overlap = 0;
    for (const auto &t : p) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            it->second -= 1;
            overlap += 1;
        }
    }
    if (overlap == 0) {
        return 0.0;
    }
    const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

ScorePair score_against_golds(const std::string &pred, const std::vector<std::string> &golds) {
    if (golds.empty()) {
        raise(ErrorCode::empty_gold_list, "score_against_golds: gold list is empty");
    }
    ScorePair best;
    for (const auto &gold : golds) {
        best.em = std::max(best.em, exact_match(pred, gold));
        best.f1 = std::max(best.f1, token_f1(pred, gold));
    }
    return best;
}

}  // namespace tracepress
