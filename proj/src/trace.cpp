#include "tracepress/trace.hpp"

#include <cstring>

#include "tracepress/error.hpp"
#include "tracepress/unicode_punct.hpp"

namespace tracepress {

namespace {

bool is_ascii_space_byte(unsigned char b) {
    return b == ' ' || b == '\t' || b == '\n' || b == '\r' || b == '\f' || b == '\v';
}

// Decodes the code point starting at `i`, returning its byte length.
// Invalid sequences are treated as a single byte.
size_t decode_at(const std::string &s, size_t i, uint32_t &cp) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    size_t len = 1;
    uint32_t acc = b0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        acc = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        acc = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        acc = b0 & 0x07;
    }
    if (len == 1 || i + len > s.size()) {
        cp = b0;
        return 1;
    }
    for (size_t k = 1; k < len; ++k) {
        const auto bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
            cp = b0;
            return 1;
        }
        acc = (acc << 6) | (bk & 0x3F);
    }
    cp = acc;
    return len;
}

std::string trim(const std::string &s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && is_ascii_space_byte(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && is_ascii_space_byte(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

}  // namespace

std::vector<TokenSpan> reference_tokenize(const std::string &text) {
    std::vector<TokenSpan> spans;
    size_t i = 0;
    const size_t n = text.size();
    size_t word_begin = std::string::npos;
    while (i < n) {
        const auto b = static_cast<unsigned char>(text[i]);
        if (b < 0x80 && is_ascii_space_byte(b)) {
            if (word_begin != std::string::npos) {
                spans.push_back({word_begin, i});
                word_begin = std::string::npos;
            }
            ++i;
            continue;
        }
        uint32_t cp = 0;
        const size_t len = decode_at(text, i, cp);
        if (is_punct_codepoint(cp)) {
            if (word_begin != std::string::npos) {
                spans.push_back({word_begin, i});
                word_begin = std::string::npos;
            }
            spans.push_back({i, i + len});
        } else if (word_begin == std::string::npos) {
            word_begin = i;
        }
        i += len;
    }
    if (word_begin != std::string::npos) {
        spans.push_back({word_begin, n});
    }
    return spans;
}

size_t count_tokens(const std::string &text, const TokenizerSpec &tok,
                    std::optional<size_t> backend_count) {
    if (tok.kind == TokenizerKind::backend_reported) {
        if (!backend_count.has_value()) {
            raise(ErrorCode::backend_count_unavailable,
                  "count_tokens: tokenizer '" + tok.identifier +
                      "' is backend-reported and no usage count was supplied");
        }
        return *backend_count;
    }
    return reference_tokenize(text).size();
}

ThinkTrace extract_think(const std::string &response, const TokenizerSpec &tok) {
    static const std::string open_tag = "<think>";
    static const std::string close_tag = "</think>";

    const size_t open_pos = response.find(open_tag);
    if (open_pos == std::string::npos) {
        raise(ErrorCode::missing_think_block, "extract_think: no <think> tag in response");
    }
    const size_t body_pos = open_pos + open_tag.size();
    const size_t close_pos = response.find(close_tag, body_pos);
    if (close_pos == std::string::npos) {
        raise(ErrorCode::missing_think_block, "extract_think: <think> tag never closed");
    }

    ThinkTrace trace;
    trace.raw_text = trim(response.substr(body_pos, close_pos - body_pos));
    if (trace.raw_text.empty()) {
        raise(ErrorCode::empty_think_block, "extract_think: <think> block is empty");
    }
    trace.raw_tokens = count_tokens(trace.raw_text, tok);
    trace.truncated_text = trace.raw_text;
    trace.truncated_tokens = trace.raw_tokens;
    return trace;
}

int format_reward(const std::string &response) {
    try {
        extract_think(response);
        return 1;
    } catch (const Error &) {
        return 0;
    }
}

std::string truncate_to_budget(const std::string &text, size_t budget, const TokenizerSpec &tok) {
    (void)tok; // truncation is always at reference-token boundaries
    if (budget < 1) {
        raise(ErrorCode::invalid_budget, "truncate_to_budget: budget must be >= 1");
    }
    const auto spans = reference_tokenize(text);
    if (spans.size() <= budget) {
        return text;
    }
    return text.substr(0, spans[budget - 1].end);
}

BudgetSpec compute_budget(size_t context_tokens, int ratio) {
    if (context_tokens < 1) {
        raise(ErrorCode::invalid_input, "compute_budget: context_tokens must be >= 1");
    }
    if (ratio < 1) {
        raise(ErrorCode::invalid_input, "compute_budget: ratio must be >= 1");
    }
    BudgetSpec spec;
    spec.context_tokens = context_tokens;
    spec.ratio = ratio;
    spec.budget = context_tokens / static_cast<size_t>(ratio);
    if (spec.budget < 1) {
        spec.budget = 1;
    }
    return spec;
}

double actual_ratio(size_t trace_tokens, size_t context_tokens) {
    if (context_tokens == 0) {
        raise(ErrorCode::division_by_zero, "actual_ratio: context_tokens is zero");
    }
    return static_cast<double>(trace_tokens) / static_cast<double>(context_tokens);
}

}  // namespace tracepress
