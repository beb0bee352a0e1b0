#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracepress/backend.hpp"
#include "tracepress/metrics.hpp"
#include "tracepress/rewards.hpp"
#include "tracepress/rng.hpp"
#include "tracepress/trace.hpp"

namespace tracepress {

struct Document {
    std::string title;
    std::string text;
};

// One QA instance: a question, its source documents, and the accepted answers.
struct CompressionSample {
    std::string id;
    std::string question;
    std::vector<Document> documents;
    std::vector<std::string> golds;
};

// Everything observed while compressing and answering one sample. Serializes
// to one JSONL line with a stable key order, so identical runs produce
// identical bytes.
struct CompressionRecord {
    std::string sample_id;
    int ratio_target = 0;
    BudgetSpec budget;
    std::string thinker_prompt;
    std::string thinker_response_raw;
    ThinkTrace trace;
    std::string prediction;
    ScorePair score;
    RewardBreakdown reward;
    double actual_ratio = 0.0;
    double latency_thinker_ms = 0.0;
    double latency_answerer_ms = 0.0;
    double latency_e2e_ms = 0.0;  // thinker + answerer
    std::string answer_template_hash;
    std::string error;  // empty on success; backend failure summary otherwise
};

struct ContextText {
    std::string text;
    size_t tokens = 0;
};

// Shared knobs for scoring a sample; mirrors the run config.
struct PipelineConfig {
    double gamma = 0.2;
    RewardWeights weights;
    HackRules hack_rules;
    TokenizerSpec tokenizer;
    std::string answer_template;  // empty = built-in default
    int max_concurrency = 4;
};

// The fixed instruction template sent to the answer backend. {trace} and {q}
// are the only placeholders.
const std::string &default_answer_template();

// 16-hex-digit FNV-1a digest of arbitrary text; stamps the answer template
// into each record so downstream readers can detect template drift.
std::string text_digest(const std::string &text);

// Renders the compressor instruction with the context, question, and budget
// figures substituted. The budget appears both as an absolute token cap and
// as the ratio against the original context length.
std::string build_thinker_prompt(const std::string &question, const std::string &context_text,
                                 const BudgetSpec &budget);

// Substitutes {trace} and {q} into the answer template (first occurrence
// each). An empty trace yields a closed-book-style prompt; the call still
// goes through.
std::string build_answer_prompt(const std::string &question, const std::string &trace_text,
                                const std::string &answer_template = std::string());

// Joins documents as "Document: {title}.\n{text}" blocks separated by blank
// lines. A title already ending in "." is not double-perioded. tokens = the
// reference token count of the result.
ContextText concat_context(const std::vector<Document> &documents);

// Runs the full flow for one sample at a fixed ratio: budget from context
// length, thinker call, think-block extraction, truncation, answer call on
// the truncated trace only, scoring, and reward assembly. A response without
// a valid think block produces a zero-reward record (format = 0, no answer
// call) instead of failing the batch. Backend errors are rethrown with the
// sample id attached.
CompressionRecord run_sample(const CompressionSample &sample, int ratio, ChatBackend &thinker,
                             ChatBackend &answerer, const PipelineConfig &cfg);

// Question-only baseline: the answer backend is called with an empty context
// slot and the prediction is scored against the golds.
ScorePair run_closed_book(const CompressionSample &sample, ChatBackend &answerer,
                          const PipelineConfig &cfg, std::string *prediction_out = nullptr);

// Uniform draw from the configured ratio set.
int sample_ratio(Rng &rng, const std::vector<int> &ratios);

// Runs all samples at the fixed ratio with at most cfg.max_concurrency
// in flight; per-sample backend failures are captured in record.error.
// Records are returned sorted by sample_id regardless of completion order.
std::vector<CompressionRecord> run_batch(const std::vector<CompressionSample> &samples, int ratio,
                                         ChatBackend &thinker, ChatBackend &answerer,
                                         const PipelineConfig &cfg);

// One JSON object, stable key order, no trailing newline.
std::string serialize_record(const CompressionRecord &record);

}  // namespace tracepress
