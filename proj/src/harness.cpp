#include "tracepress/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "httplib.h"
#include "json.hpp"
#include "tracepress/error.hpp"

namespace tracepress {

namespace {

[[noreturn]] void request_fail(const std::string &field, const std::string &why) {
    raise(ErrorCode::schema_error, "field '" + field + "': " + why);
}

}  // namespace

EvalRow aggregate_records(const std::vector<CompressionRecord> &records,
                          const std::string &dataset_name, int ratio) {
    if (records.empty()) {
        raise(ErrorCode::empty_dataset, "aggregate_records: no records for " + dataset_name);
    }
    EvalRow row;
    row.dataset = dataset_name;
    row.ratio_target = ratio;
    row.n = records.size();
    double f1 = 0.0, em = 0.0, act = 0.0, e2e = 0.0;
    size_t hacked = 0, fmt_fail = 0;
    for (const auto &rec : records) {
        f1 += rec.score.f1;
        em += rec.score.em;
        act += rec.actual_ratio;
        e2e += rec.latency_e2e_ms;
        hacked += rec.reward.hack_gate == 0 ? 1 : 0;
        fmt_fail += rec.reward.format == 0 ? 1 : 0;
    }
    const double n = static_cast<double>(records.size());
    row.f1_avg = f1 / n;
    row.em_avg = em / n;
    row.actual_ratio_avg = act / n;
    row.hack_rate = static_cast<double>(hacked) / n;
    row.format_fail_rate = static_cast<double>(fmt_fail) / n;
    row.latency_e2e_avg_ms = e2e / n;
    return row;
}

EvalOutput evaluate(const Dataset &ds, int ratio, ChatBackend &thinker, ChatBackend &answerer,
                    const PipelineConfig &cfg) {
    if (ds.samples.empty()) {
        raise(ErrorCode::empty_dataset, "evaluate: dataset '" + ds.name + "' is empty");
    }
    EvalOutput out;
    out.records = run_batch(ds.samples, ratio, thinker, answerer, cfg);
    out.row = aggregate_records(out.records, ds.name, ratio);
    return out;
}

std::string report_to_csv(const EvalReport &report) {
    std::string out = "dataset,ratio,n,f1,em,act_ratio,hack_rate,fmt_fail,e2e_ms\n";
    char line[256];
    for (const auto &row : report.rows) {
        std::snprintf(line, sizeof(line), "%s,%d,%zu,%.4f,%.4f,%.4f,%.4f,%.4f,%.3f\n",
                      row.dataset.c_str(), row.ratio_target, row.n, row.f1_avg, row.em_avg,
                      row.actual_ratio_avg, row.hack_rate, row.format_fail_rate,
                      row.latency_e2e_avg_ms);
        out += line;
    }
    return out;
}

std::string report_to_json(const EvalReport &report) {
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto &row : report.rows) {
        doc["rows"].push_back({{"dataset", row.dataset},
                               {"ratio_target", row.ratio_target},
                               {"n", row.n},
                               {"f1_avg", row.f1_avg},
                               {"em_avg", row.em_avg},
                               {"actual_ratio_avg", row.actual_ratio_avg},
                               {"hack_rate", row.hack_rate},
                               {"format_fail_rate", row.format_fail_rate},
                               {"latency_e2e_avg_ms", row.latency_e2e_avg_ms}});
    }
    if (!report.config_echo_json.empty()) {
        doc["config"] = nlohmann::json::parse(report.config_echo_json);
    }
    return doc.dump(2) + "\n";
}

EvalReport report_from_json(const std::string &json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("rows") ||
        !doc["rows"].is_array()) {
        raise(ErrorCode::schema_error, "report JSON: expected object with 'rows' array");
    }
    EvalReport report;
    for (const auto &entry : doc["rows"]) {
        EvalRow row;
        row.dataset = entry.at("dataset").get<std::string>();
        row.ratio_target = entry.at("ratio_target").get<int>();
        row.n = entry.at("n").get<size_t>();
        row.f1_avg = entry.at("f1_avg").get<double>();
        row.em_avg = entry.at("em_avg").get<double>();
        row.actual_ratio_avg = entry.at("actual_ratio_avg").get<double>();
        row.hack_rate = entry.at("hack_rate").get<double>();
        row.format_fail_rate = entry.at("format_fail_rate").get<double>();
        row.latency_e2e_avg_ms = entry.at("latency_e2e_avg_ms").get<double>();
        report.rows.push_back(std::move(row));
    }
    if (doc.contains("config")) {
        report.config_echo_json = doc["config"].dump();
    }
    return report;
}

void emit_report(const EvalReport &report, ReportFormat format, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::io_error, "cannot open for writing: " + path);
    }
    out << (format == ReportFormat::csv ? report_to_csv(report) : report_to_json(report));
    if (!out) {
        raise(ErrorCode::io_error, "write failed: " + path);
    }
}

void emit_records(const std::vector<CompressionRecord> &records, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::io_error, "cannot open for writing: " + path);
    }
    for (const auto &rec : records) {
        out << serialize_record(rec) << "\n";
    }
    if (!out) {
        raise(ErrorCode::io_error, "write failed: " + path);
    }
}

RewardRequest parse_reward_request(const std::string &body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        request_fail("(root)", "body must be a JSON object");
    }
    RewardRequest req;
    if (!doc.contains("response_text") || !doc["response_text"].is_string()) {
        request_fail("response_text", "required string");
    }
    req.response_text = doc["response_text"].get<std::string>();
    if (!doc.contains("golds") || !doc["golds"].is_array() || doc["golds"].empty()) {
        request_fail("golds", "required non-empty array of strings");
    }
    for (const auto &g : doc["golds"]) {
        if (!g.is_string()) {
            request_fail("golds", "entries must be strings");
        }
        req.golds.push_back(g.get<std::string>());
    }
    if (!doc.contains("context_tokens") || !doc["context_tokens"].is_number_unsigned() ||
        doc["context_tokens"].get<uint64_t>() < 1) {
        request_fail("context_tokens", "required positive integer");
    }
    req.context_tokens = doc["context_tokens"].get<size_t>();
    if (!doc.contains("ratio") || !doc["ratio"].is_number_integer() ||
        doc["ratio"].get<int64_t>() < 1) {
        request_fail("ratio", "required positive integer");
    }
    req.ratio = doc["ratio"].get<int>();
    if (doc.contains("question")) {
        if (!doc["question"].is_string()) {
            request_fail("question", "must be a string");
        }
        req.question = doc["question"].get<std::string>();
    }
    if (doc.contains("gamma")) {
        if (!doc["gamma"].is_number() || doc["gamma"].get<double>() <= 0.0) {
            request_fail("gamma", "must be a positive number");
        }
        req.gamma = doc["gamma"].get<double>();
    }
    if (doc.contains("weights")) {
        const auto &w = doc["weights"];
        if (!w.is_object() || !w.contains("lambda_fmt") || !w["lambda_fmt"].is_number() ||
            !w.contains("lambda_utility") || !w["lambda_utility"].is_number()) {
            request_fail("weights", "must be {lambda_fmt: number, lambda_utility: number}");
        }
        RewardWeights weights;
        weights.lambda_fmt = w["lambda_fmt"].get<double>();
        weights.lambda_utility = w["lambda_utility"].get<double>();
        if (weights.lambda_fmt < 0.0 || weights.lambda_utility < 0.0) {
            request_fail("weights", "weights must be non-negative");
        }
        req.weights = weights;
    }
    return req;
}

std::string reward_response_to_json(const RewardResponse &response) {
    nlohmann::ordered_json doc;
    doc["format"] = response.reward.format;
    doc["utility"] = response.reward.utility;
    doc["budget"] = response.reward.budget;
    doc["hack_gate"] = response.reward.hack_gate;
    doc["total"] = response.reward.total;
    doc["raw_tokens"] = response.raw_tokens;
    doc["truncated_tokens"] = response.truncated_tokens;
    doc["prediction"] = response.prediction;
    return doc.dump();
}

RewardResponse score_reward_request(const RewardRequest &request, ChatBackend &answerer,
                                    const PipelineConfig &cfg) {
    const RewardWeights weights = request.weights.value_or(cfg.weights);
    const double gamma = request.gamma.value_or(cfg.gamma);
    const BudgetSpec budget = compute_budget(request.context_tokens, request.ratio);
    const BudgetGate gate{budget.budget, gamma};

    RewardResponse res;
    ThinkTrace trace;
    bool format_ok = true;
    try {
        trace = extract_think(request.response_text);
    } catch (const Error &) {
        format_ok = false;
    }

    if (!format_ok) {
        res.reward = combined_reward(0, 0.0, budget_reward(0.0, gate), 1, weights);
        return res;
    }

    trace.raw_tokens = count_tokens(trace.raw_text);
    trace.truncated_text = truncate_to_budget(trace.raw_text, budget.budget);
    trace.truncated_tokens = count_tokens(trace.truncated_text);
    res.raw_tokens = trace.raw_tokens;
    res.truncated_tokens = trace.truncated_tokens;

    const auto answer = answerer.chat(
        {{"user", build_answer_prompt(request.question, trace.truncated_text,
                                      cfg.answer_template)}});
    res.prediction = answer.text;
    const ScorePair score = score_against_golds(res.prediction, request.golds);
    const double utility = utility_reward(score);
    const double budget_r = budget_reward(static_cast<double>(trace.raw_tokens), gate);
    const int gate_bit = hack_gate(trace.raw_text, cfg.hack_rules, request.golds);
    res.reward = combined_reward(1, utility, budget_r, gate_bit, weights);
    return res;
}

struct RewardService::Impl {
    ChatBackend &answerer;
    PipelineConfig cfg;
    std::function<bool()> probe;
    httplib::Server server;
    std::thread thread;

    Impl(ChatBackend &a, PipelineConfig c, std::function<bool()> p)
        : answerer(a), cfg(std::move(c)), probe(std::move(p)) {
        server.Post("/v1/reward", [this](const httplib::Request &req, httplib::Response &res) {
            handle_reward(req, res);
        });
        server.Get("/healthz", [this](const httplib::Request &, httplib::Response &res) {
            if (!probe || probe()) {
                res.status = 200;
                res.set_content("ok", "text/plain");
            } else {
                res.status = 503;
                res.set_content("answer backend unreachable", "text/plain");
            }
        });
        server.set_exception_handler(
            [](const httplib::Request &, httplib::Response &res, std::exception_ptr) {
                res.status = 500;
                res.set_content(R"({"error":"internal error"})", "application/json");
            });
    }

    void handle_reward(const httplib::Request &req, httplib::Response &res) {
        RewardRequest parsed;
        try {
            parsed = parse_reward_request(req.body);
        } catch (const Error &e) {
            res.status = 400;
            res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
            return;
        }
        try {
            const RewardResponse scored = score_reward_request(parsed, answerer, cfg);
            res.status = 200;
            res.set_content(reward_response_to_json(scored), "application/json");
        } catch (const Error &e) {
            // Budget math rejections are caller errors; everything else is a
            // backend-side failure.
            if (e.code() == ErrorCode::invalid_input || e.code() == ErrorCode::invalid_budget ||
                e.code() == ErrorCode::empty_gold_list || e.code() == ErrorCode::out_of_range) {
                res.status = 400;
            } else {
                res.status = 502;
            }
            res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
        }
    }
};

RewardService::RewardService(ChatBackend &answerer, PipelineConfig cfg,
                             std::function<bool()> health_probe)
    : impl_(std::make_unique<Impl>(answerer, std::move(cfg), std::move(health_probe))) {}

RewardService::~RewardService() { stop(); }

int RewardService::start(const std::string &host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) {
            raise(ErrorCode::io_error, "reward service: cannot bind to " + host);
        }
    } else if (!impl_->server.bind_to_port(host, port)) {
        raise(ErrorCode::io_error,
              "reward service: cannot bind to " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

bool RewardService::run(const std::string &host, int port) {
    return impl_->server.listen(host, port);
}

void RewardService::stop() {
    if (!impl_) {
        return;
    }
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

}  // namespace tracepress
