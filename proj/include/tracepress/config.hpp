#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tracepress/backend.hpp"
#include "tracepress/pipeline.hpp"

namespace tracepress {

// One entry in the config's backend table: a scripted mock or an
// OpenAI-compatible HTTP endpoint.
struct BackendSpec {
    std::string kind;  // "mock" | "http"
    std::string script;  // mock: path to the JSONL reply script
    HttpBackendConfig http;  // http: connection settings
};

// The single JSON document that pins an entire run: backends, reward knobs,
// ratio set, tokenizer, concurrency, dataset, and service address. Echoed
// into every report for provenance.
struct RunConfig {
    std::map<std::string, BackendSpec> backends;
    std::string thinker;   // backend table key
    std::string answerer;  // backend table key
    RewardWeights weights;
    double gamma = 0.2;
    HackRules hack_rules;
    std::vector<int> ratios = {4, 8};
    TokenizerSpec tokenizer;
    int max_concurrency = 4;
    std::string dataset;  // JSONL path
    int thinker_max_tokens = 2048;
    std::string answer_template;  // empty = built-in default
    std::string serve_host = "127.0.0.1";
    int serve_port = 8089;
    uint64_t seed = 42;

    PipelineConfig pipeline() const;
};

// Parses and validates the run config. Unknown top-level keys and type
// mismatches raise config_error naming the key.
RunConfig load_config(const std::string &path);
RunConfig parse_config(const std::string &json_text, const std::string &origin);

// Canonical JSON rendering of the config (stable key order) for report
// provenance stamps.
std::string config_to_json(const RunConfig &cfg);

// Instantiates the named backend from the table. `max_output_tokens`
// overrides the HTTP generation cap (the thinker's 2048-token default);
// pass 0 to keep the table entry's own setting.
std::unique_ptr<ChatBackend> make_backend(const RunConfig &cfg, const std::string &name,
                                          int max_output_tokens = 0);

}  // namespace tracepress
