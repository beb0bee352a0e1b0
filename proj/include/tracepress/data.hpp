#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracepress/pipeline.hpp"
#include "tracepress/trace.hpp"

namespace tracepress {

struct Dataset {
    std::string name;
    std::vector<CompressionSample> samples;
};

// Distribution of context token lengths across a dataset.
struct DataStats {
    size_t n_samples = 0;
    double avg_tokens = 0.0;
    size_t min_tokens = 0;
    size_t max_tokens = 0;
};

// Loads one sample per line from the canonical schema
// {"id", "question", "context": [{"title", "text"}], "answers": [...]}.
// The whole file is validated before anything is returned; errors carry the
// line number and offending field. The dataset name is the file stem.
Dataset load_jsonl(const std::string &path);

// Inverse of load_jsonl: one canonical JSON object per line, trailing
// newline. load_jsonl(save_jsonl(ds)) == ds.
void save_jsonl(const Dataset &ds, const std::string &path);

// Context token lengths via concat_context; backend-reported tokenizers fall
// back to the reference count since there is no usage data for local text.
DataStats stats(const Dataset &ds, const TokenizerSpec &tok);

// Seeded sample of n items without replacement, original order preserved.
Dataset subsample(const Dataset &ds, size_t n, uint64_t seed);

}  // namespace tracepress
