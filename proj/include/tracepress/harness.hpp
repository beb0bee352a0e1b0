#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tracepress/config.hpp"
#include "tracepress/data.hpp"
#include "tracepress/pipeline.hpp"

namespace tracepress {

// One aggregated report row: arithmetic means over the records of a
// (dataset, ratio) run.
struct EvalRow {
    std::string dataset;
    int ratio_target = 0;
    size_t n = 0;
    double f1_avg = 0.0;
    double em_avg = 0.0;
    double actual_ratio_avg = 0.0;
    double hack_rate = 0.0;         // fraction with hack_gate = 0
    double format_fail_rate = 0.0;  // fraction with format = 0
    double latency_e2e_avg_ms = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::string config_echo_json;  // provenance stamp; empty = omitted
};

enum class ReportFormat { json, csv };

// Means over a finished batch; the row the CSV line is printed from.
EvalRow aggregate_records(const std::vector<CompressionRecord> &records,
                          const std::string &dataset_name, int ratio);

struct EvalOutput {
    EvalRow row;
    std::vector<CompressionRecord> records;
};

// run_batch over the dataset at one fixed ratio, then aggregate. Per-sample
// backend failures surface in record.error, not as exceptions.
EvalOutput evaluate(const Dataset &ds, int ratio, ChatBackend &thinker, ChatBackend &answerer,
                    const PipelineConfig &cfg);

// CSV: header `dataset,ratio,n,f1,em,act_ratio,hack_rate,fmt_fail,e2e_ms`,
// scores to 4 decimal places. JSON mirrors the EvalRow field names. Both end
// with a newline.
void emit_report(const EvalReport &report, ReportFormat format, const std::string &path);
std::string report_to_csv(const EvalReport &report);
std::string report_to_json(const EvalReport &report);
EvalReport report_from_json(const std::string &json_text);

// One serialized CompressionRecord per line.
void emit_records(const std::vector<CompressionRecord> &records, const std::string &path);

// Wire types of the reward endpoint. The request carries the raw thinker
// response plus the budget inputs; scoring reruns the exact pipeline path:
// think-block extraction, budget math, answer call, Eq-style composition.
struct RewardRequest {
    std::string response_text;
    std::vector<std::string> golds;
    size_t context_tokens = 0;
    int ratio = 0;
    std::string question;  // optional on the wire; empty = question-free scoring
    std::optional<double> gamma;
    std::optional<RewardWeights> weights;
};

struct RewardResponse {
    RewardBreakdown reward;
    size_t raw_tokens = 0;
    size_t truncated_tokens = 0;
    std::string prediction;
};

// Throws schema_error with a field-level message on malformed bodies.
RewardRequest parse_reward_request(const std::string &body);
std::string reward_response_to_json(const RewardResponse &response);

// The single scoring path shared by the HTTP service and in-process callers;
// identical inputs yield identical breakdowns through either route.
RewardResponse score_reward_request(const RewardRequest &request, ChatBackend &answerer,
                                    const PipelineConfig &cfg);

// HTTP reward service: POST /v1/reward, GET /healthz. Schema violations
// return 400, answer-backend failures 502; no request crashes the service.
class RewardService {
  public:
    RewardService(ChatBackend &answerer, PipelineConfig cfg,
                  std::function<bool()> health_probe = nullptr);
    ~RewardService();

    // Binds and serves on a background thread; port 0 picks a free port.
    // Returns the bound port once the server is accepting connections.
    int start(const std::string &host, int port);
    // Blocking variant for the CLI.
    bool run(const std::string &host, int port);
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tracepress
