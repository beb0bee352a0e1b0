#include "tracepress/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "json.hpp"
#include "tracepress/error.hpp"

namespace tracepress {

namespace {

const char kThinkerTemplate[] =
    "You are a query-conditioned context compressor. Given the context and current "
    "information need, write a high-quality <think> trace that preserves the context "
    "information a downstream model needs to locate and use relevant information.\n"
    "\n"
    "Task Guidelines:\n"
    "\n"
    "1. Information Selection\n"
    "- For information-dense context, extract and summarize information-need-relevant "
    "facts, evidence, entities, and relations.\n"
    "- For example-based context, identify relevant examples and summarize reusable notes "
    "on the underlying pattern, format, criterion, or strategy.\n"
    "- For trajectory-level context, preserve the current state, completed work, useful "
    "outputs, decisions, errors, failed attempts, and experience.\n"
    "- Connect scattered information and reorganize it into a concise, task-useful "
    "structure.\n"
    "\n"
    "2. Think Requirements\n"
    "- Keep <think> concise, structured, context-grounded, and relevant to the "
    "information need.\n"
    "- Prefer compact summaries, relations, reusable criteria, and state updates over "
    "context restatement.\n"
    "- Use <think> as a compressed trace for downstream use, not as a final-answer "
    "field.\n"
    "- Do not solve the information need or state a final answer.\n"
    "\n"
    "3. Output Format\n"
    "Your response should be structured as follows:\n"
    "\n"
    "<think>\n"
    "[High-quality compressed context trace for downstream use.]\n"
    "</think>\n"
    "\n"
    "Context: {context}\n"
    "\n"
    "Information Need: {question}\n"
    "\n"
    "Compression Budget:\n"
    "- Maximum <think> length: {target_think_len} tokens.\n"
    "- Compression ratio: {comp_ratio}x from the original {context_token_len} context "
    "tokens.";

const std::string kAnswerTemplate =
    "Answer the question based only on the following context.\n"
    "Context: {trace}\n"
    "Question: {q}\n"
    "Answer:";

void replace_first(std::string &text, const std::string &slot, const std::string &value) {
    const size_t pos = text.find(slot);
    if (pos != std::string::npos) {
        text.replace(pos, slot.size(), value);
    }
}

// Backend-reported counts apply only where the backend actually reported one
// (completion usage); everything counted locally falls back to the reference
// tokenizer.
size_t count_with_fallback(const std::string &text, const TokenizerSpec &tok,
                           const std::optional<size_t> &backend_count) {
    if (tok.kind == TokenizerKind::backend_reported && backend_count) {
        return *backend_count;
    }
    return count_tokens(text);
}

const std::string &answer_template_or_default(const std::string &tmpl) {
    return tmpl.empty() ? default_answer_template() : tmpl;
}

}  // namespace

const std::string &default_answer_template() { return kAnswerTemplate; }

std::string text_digest(const std::string &text) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    static const char *hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string build_thinker_prompt(const std::string &question, const std::string &context_text,
                                 const BudgetSpec &budget) {
    if (budget.context_tokens < 1 || budget.ratio < 1 || budget.budget < 1) {
        raise(ErrorCode::invalid_input, "build_thinker_prompt: invalid budget spec");
    }
    std::string prompt = kThinkerTemplate;
    replace_first(prompt, "{context}", context_text);
    replace_first(prompt, "{question}", question);
    replace_first(prompt, "{target_think_len}", std::to_string(budget.budget));
    replace_first(prompt, "{comp_ratio}", std::to_string(budget.ratio));
    replace_first(prompt, "{context_token_len}", std::to_string(budget.context_tokens));
    return prompt;
}

std::string build_answer_prompt(const std::string &question, const std::string &trace_text,
                                const std::string &answer_template) {
    std::string prompt = answer_template_or_default(answer_template);
    replace_first(prompt, "{trace}", trace_text);
    replace_first(prompt, "{q}", question);
    return prompt;
}

ContextText concat_context(const std::vector<Document> &documents) {
    ContextText out;
    for (size_t i = 0; i < documents.size(); ++i) {
        if (i > 0) {
            out.text += "\n\n";
        }
        out.text += "Document: ";
        out.text += documents[i].title;
        if (documents[i].title.empty() || documents[i].title.back() != '.') {
            out.text += ".";
        }
        out.text += "\n";
        out.text += documents[i].text;
    }
    out.tokens = count_tokens(out.text);
    return out;
}

CompressionRecord run_sample(const CompressionSample &sample, int ratio, ChatBackend &thinker,
                             ChatBackend &answerer, const PipelineConfig &cfg) {
    CompressionRecord rec;
    rec.sample_id = sample.id;
    rec.ratio_target = ratio;
    rec.answer_template_hash = text_digest(answer_template_or_default(cfg.answer_template));

    const ContextText ctx = concat_context(sample.documents);
    rec.budget = compute_budget(ctx.tokens, ratio);
    rec.thinker_prompt = build_thinker_prompt(sample.question, ctx.text, rec.budget);

    ChatResult thinker_res;
    try {
        thinker_res = thinker.chat({{"user", rec.thinker_prompt}});
    } catch (const Error &e) {
        raise(e.code(), "sample " + sample.id + ": thinker: " + e.what());
    }
    rec.thinker_response_raw = thinker_res.text;
    rec.latency_thinker_ms = thinker_res.latency_ms;

    bool format_ok = true;
    try {
        rec.trace = extract_think(thinker_res.text);
    } catch (const Error &) {
        format_ok = false;  // zero-reward record, not a batch failure
    }

    const BudgetGate gate{rec.budget.budget, cfg.gamma};
    if (format_ok) {
        rec.trace.raw_tokens =
            count_with_fallback(rec.trace.raw_text, cfg.tokenizer, thinker_res.completion_tokens);
        rec.trace.truncated_text = truncate_to_budget(rec.trace.raw_text, rec.budget.budget);
        rec.trace.truncated_tokens = count_tokens(rec.trace.truncated_text);

        ChatResult answer_res;
        try {
            answer_res = answerer.chat(
                {{"user",
                  build_answer_prompt(sample.question, rec.trace.truncated_text,
                                      cfg.answer_template)}});
        } catch (const Error &e) {
            raise(e.code(), "sample " + sample.id + ": answerer: " + e.what());
        }
        rec.prediction = answer_res.text;
        rec.latency_answerer_ms = answer_res.latency_ms;
        rec.score = score_against_golds(rec.prediction, sample.golds);

        const double utility = utility_reward(rec.score);
        const double budget = budget_reward(static_cast<double>(rec.trace.raw_tokens), gate);
        const int gate_bit = hack_gate(rec.trace.raw_text, cfg.hack_rules, sample.golds);
        rec.reward = combined_reward(1, utility, budget, gate_bit, cfg.weights);
    } else {
        rec.trace = ThinkTrace{};
        rec.prediction.clear();
        rec.score = ScorePair{0, 0.0};
        rec.reward = combined_reward(0, 0.0, budget_reward(0.0, gate), 1, cfg.weights);
    }

    rec.actual_ratio = actual_ratio(rec.trace.raw_tokens, rec.budget.context_tokens);
    rec.latency_e2e_ms = rec.latency_thinker_ms + rec.latency_answerer_ms;
    return rec;
}

ScorePair run_closed_book(const CompressionSample &sample, ChatBackend &answerer,
                          const PipelineConfig &cfg, std::string *prediction_out) {
    const auto res =
        answerer.chat({{"user", build_answer_prompt(sample.question, "", cfg.answer_template)}});
    if (prediction_out != nullptr) {
        *prediction_out = res.text;
    }
    return score_against_golds(res.text, sample.golds);
}

int sample_ratio(Rng &rng, const std::vector<int> &ratios) {
    if (ratios.empty()) {
        raise(ErrorCode::empty_ratio_set, "sample_ratio: ratio set is empty");
    }
    return ratios[rng.uniform_below(ratios.size())];
}

std::vector<CompressionRecord> run_batch(const std::vector<CompressionSample> &samples, int ratio,
                                         ChatBackend &thinker, ChatBackend &answerer,
                                         const PipelineConfig &cfg) {
    std::vector<CompressionRecord> records(samples.size());
    std::atomic<size_t> next{0};

    const size_t n_workers = std::min<size_t>(
        samples.size(), static_cast<size_t>(std::max(1, cfg.max_concurrency)));
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < samples.size(); i = next.fetch_add(1)) {
            try {
                records[i] = run_sample(samples[i], ratio, thinker, answerer, cfg);
            } catch (const Error &e) {
                CompressionRecord failed;
                failed.sample_id = samples[i].id;
                failed.ratio_target = ratio;
                failed.answer_template_hash =
                    text_digest(answer_template_or_default(cfg.answer_template));
                failed.error = e.what();
                records[i] = std::move(failed);
            }
        }
    };

    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (size_t t = 0; t < n_workers; ++t) {
            threads.emplace_back(worker);
        }
        for (auto &th : threads) {
            th.join();
        }
    }

    std::sort(records.begin(), records.end(),
              [](const CompressionRecord &a, const CompressionRecord &b) {
                  return a.sample_id < b.sample_id;
              });
    return records;
}

std::string serialize_record(const CompressionRecord &record) {
    nlohmann::ordered_json doc;
    doc["sample_id"] = record.sample_id;
    doc["ratio_target"] = record.ratio_target;
    doc["budget"] = {{"context_tokens", record.budget.context_tokens},
                     {"ratio", record.budget.ratio},
                     {"budget", record.budget.budget}};
    doc["thinker_prompt"] = record.thinker_prompt;
    doc["thinker_response_raw"] = record.thinker_response_raw;
    doc["trace"] = {{"raw_text", record.trace.raw_text},
                    {"raw_tokens", record.trace.raw_tokens},
                    {"truncated_text", record.trace.truncated_text},
                    {"truncated_tokens", record.trace.truncated_tokens}};
    doc["prediction"] = record.prediction;
    doc["score"] = {{"em", record.score.em}, {"f1", record.score.f1}};
    doc["reward"] = {{"format", record.reward.format},
                     {"utility", record.reward.utility},
                     {"budget", record.reward.budget},
                     {"hack_gate", record.reward.hack_gate},
                     {"total", record.reward.total}};
    doc["actual_ratio"] = record.actual_ratio;
    doc["latency_thinker_ms"] = record.latency_thinker_ms;
    doc["latency_answerer_ms"] = record.latency_answerer_ms;
    doc["latency_e2e_ms"] = record.latency_e2e_ms;
    doc["answer_template_hash"] = record.answer_template_hash;
    doc["error"] = record.error;
    return doc.dump();
}

}  // namespace tracepress
