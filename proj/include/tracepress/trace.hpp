#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tracepress {

// The extracted thinking text, before and after budget truncation.
struct ThinkTrace {
    std::string raw_text;
    size_t raw_tokens = 0;
    std::string truncated_text;
    size_t truncated_tokens = 0;
};

enum class TokenizerKind {
    reference,        // deterministic whitespace + punctuation tokenizer
    backend_reported, // counts come from the serving backend's usage field
};

struct TokenizerSpec {
    TokenizerKind kind = TokenizerKind::reference;
    std::string identifier = "reference";
};

// Context length L, the requested ratio and the derived budget B.
struct BudgetSpec {
    size_t context_tokens = 0;
    int ratio = 1;
    size_t budget = 1;
};

// Byte span of one token within the source text.
struct TokenSpan {
    size_t begin = 0;
    size_t end = 0;
};

// Reference tokenization: maximal runs of non-whitespace characters, with
// every punctuation character split off as its own token.
std::vector<TokenSpan> reference_tokenize(const std::string &text);

// Token count under `tok`. For backend_reported specs the caller must supply
// the reported count; otherwise throws backend_count_unavailable.
size_t count_tokens(const std::string &text, const TokenizerSpec &tok = {},
                    std::optional<size_t> backend_count = std::nullopt);

// Contents of the first closed <think>...</think> block, whitespace-trimmed.
// Throws missing_think_block / empty_think_block. Token counts are filled
// from the reference tokenizer; truncated fields start equal to raw.
ThinkTrace extract_think(const std::string &response, const TokenizerSpec &tok = {});

// 1 iff extract_think succeeds.
int format_reward(const std::string &response);

// Maximal token-prefix of `text` that fits in `budget` reference tokens.
// Throws invalid_budget when budget < 1.
std::string truncate_to_budget(const std::string &text, size_t budget,
                               const TokenizerSpec &tok = {});

// B = max(1, floor(L / ratio)). Throws invalid_input on zero arguments.
BudgetSpec compute_budget(size_t context_tokens, int ratio);

// trace_tokens / context_tokens. Throws division_by_zero.
double actual_ratio(size_t trace_tokens, size_t context_tokens);

}  // namespace tracepress
