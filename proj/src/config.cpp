#include "tracepress/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tracepress/error.hpp"

namespace tracepress {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string &origin, const std::string &key,
                              const std::string &why) {
    raise(ErrorCode::config_error, origin + ": key '" + key + "': " + why);
}

void check_known_keys(const json &obj, const std::set<std::string> &known,
                      const std::string &origin, const std::string &scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (known.count(it.key()) == 0) {
            config_fail(origin, scope.empty() ? it.key() : scope + "." + it.key(),
                        "unknown key");
        }
    }
}

BackendSpec parse_backend_spec(const json &obj, const std::string &origin,
                               const std::string &scope) {
    if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string()) {
        config_fail(origin, scope, "backend entry needs a string 'kind'");
    }
    BackendSpec spec;
    spec.kind = obj["kind"].get<std::string>();
    if (spec.kind == "mock") {
        check_known_keys(obj, {"kind", "script"}, origin, scope);
        if (!obj.contains("script") || !obj["script"].is_string()) {
            config_fail(origin, scope + ".script", "mock backend needs a script path");
        }
        spec.script = obj["script"].get<std::string>();
    } else if (spec.kind == "http") {
        check_known_keys(obj,
                         {"kind", "base_url", "model", "api_key_env", "temperature",
                          "max_tokens", "timeout_ms", "max_retries", "backoff_initial_ms"},
                         origin, scope);
        if (!obj.contains("base_url") || !obj["base_url"].is_string()) {
            config_fail(origin, scope + ".base_url", "http backend needs a base_url");
        }
        spec.http.base_url = obj["base_url"].get<std::string>();
        if (obj.contains("model")) spec.http.model = obj["model"].get<std::string>();
        if (obj.contains("api_key_env")) {
            spec.http.api_key_env = obj["api_key_env"].get<std::string>();
        }
        if (obj.contains("temperature")) {
            spec.http.temperature = obj["temperature"].get<double>();
        }
        if (obj.contains("max_tokens")) spec.http.max_tokens = obj["max_tokens"].get<int>();
        if (obj.contains("timeout_ms")) spec.http.timeout_ms = obj["timeout_ms"].get<int>();
        if (obj.contains("max_retries")) {
            spec.http.max_retries = obj["max_retries"].get<int>();
        }
        if (obj.contains("backoff_initial_ms")) {
            spec.http.backoff_initial_ms = obj["backoff_initial_ms"].get<int>();
        }
    } else {
        config_fail(origin, scope + ".kind", "expected 'mock' or 'http'");
    }
    return spec;
}

}  // namespace

PipelineConfig RunConfig::pipeline() const {
    PipelineConfig cfg;
    cfg.gamma = gamma;
    cfg.weights = weights;
    cfg.hack_rules = hack_rules;
    cfg.tokenizer = tokenizer;
    cfg.answer_template = answer_template;
    cfg.max_concurrency = max_concurrency;
    return cfg;
}

RunConfig parse_config(const std::string &json_text, const std::string &origin) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        raise(ErrorCode::config_error, origin + ": not a JSON object");
    }
    check_known_keys(doc,
                     {"backends", "thinker", "answerer", "weights", "gamma", "hack_rules",
                      "ratios", "tokenizer", "max_concurrency", "dataset",
                      "thinker_max_tokens", "answer_template", "serve", "seed"},
                     origin, "");

    RunConfig cfg;
    try {
        if (doc.contains("backends")) {
            if (!doc["backends"].is_object()) {
                config_fail(origin, "backends", "expected an object of named backends");
            }
            for (auto it = doc["backends"].begin(); it != doc["backends"].end(); ++it) {
                cfg.backends[it.key()] =
                    parse_backend_spec(it.value(), origin, "backends." + it.key());
            }
        }
        if (doc.contains("thinker")) cfg.thinker = doc["thinker"].get<std::string>();
        if (doc.contains("answerer")) cfg.answerer = doc["answerer"].get<std::string>();
        if (doc.contains("weights")) {
            const auto &w = doc["weights"];
            check_known_keys(w, {"lambda_fmt", "lambda_utility"}, origin, "weights");
            if (w.contains("lambda_fmt")) cfg.weights.lambda_fmt = w["lambda_fmt"].get<double>();
            if (w.contains("lambda_utility")) {
                cfg.weights.lambda_utility = w["lambda_utility"].get<double>();
            }
        }
        if (doc.contains("gamma")) cfg.gamma = doc["gamma"].get<double>();
        if (doc.contains("hack_rules")) {
            const auto &h = doc["hack_rules"];
            check_known_keys(h, {"patterns", "check_tail_declaration"}, origin, "hack_rules");
            if (h.contains("patterns")) {
                cfg.hack_rules.patterns = h["patterns"].get<std::vector<std::string>>();
            }
            if (h.contains("check_tail_declaration")) {
                cfg.hack_rules.check_tail_declaration = h["check_tail_declaration"].get<bool>();
            }
        }
        if (doc.contains("ratios")) {
            cfg.ratios = doc["ratios"].get<std::vector<int>>();
            for (int r : cfg.ratios) {
                if (r < 1) config_fail(origin, "ratios", "ratios must be >= 1");
            }
        }
        if (doc.contains("tokenizer")) {
            const auto &t = doc["tokenizer"];
            check_known_keys(t, {"kind", "identifier"}, origin, "tokenizer");
            if (t.contains("kind")) {
                const std::string kind = t["kind"].get<std::string>();
                if (kind == "reference") {
                    cfg.tokenizer.kind = TokenizerKind::reference;
                } else if (kind == "backend_reported") {
                    cfg.tokenizer.kind = TokenizerKind::backend_reported;
                } else {
                    config_fail(origin, "tokenizer.kind",
                                "expected 'reference' or 'backend_reported'");
                }
            }
            if (t.contains("identifier")) {
                cfg.tokenizer.identifier = t["identifier"].get<std::string>();
            }
        }
        if (doc.contains("max_concurrency")) {
            cfg.max_concurrency = doc["max_concurrency"].get<int>();
            if (cfg.max_concurrency < 1) {
                config_fail(origin, "max_concurrency", "must be >= 1");
            }
        }
        if (doc.contains("dataset")) cfg.dataset = doc["dataset"].get<std::string>();
        if (doc.contains("thinker_max_tokens")) {
            cfg.thinker_max_tokens = doc["thinker_max_tokens"].get<int>();
        }
        if (doc.contains("answer_template")) {
            cfg.answer_template = doc["answer_template"].get<std::string>();
        }
        if (doc.contains("serve")) {
            const auto &s = doc["serve"];
            check_known_keys(s, {"host", "port"}, origin, "serve");
            if (s.contains("host")) cfg.serve_host = s["host"].get<std::string>();
            if (s.contains("port")) cfg.serve_port = s["port"].get<int>();
        }
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<uint64_t>();
    } catch (const json::exception &e) {
        raise(ErrorCode::config_error, origin + ": " + e.what());
    }

    if (cfg.weights.lambda_fmt < 0.0 || cfg.weights.lambda_utility < 0.0) {
        config_fail(origin, "weights", "weights must be non-negative");
    }
    if (cfg.gamma <= 0.0) {
        config_fail(origin, "gamma", "must be > 0");
    }
    if (cfg.ratios.empty()) {
        config_fail(origin, "ratios", "must be non-empty");
    }
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::file_not_found, "config not found: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string config_to_json(const RunConfig &cfg) {
    nlohmann::ordered_json doc;
    doc["backends"] = nlohmann::ordered_json::object();
    for (const auto &[name, spec] : cfg.backends) {
        nlohmann::ordered_json entry;
        entry["kind"] = spec.kind;
        if (spec.kind == "mock") {
            entry["script"] = spec.script;
        } else {
            entry["base_url"] = spec.http.base_url;
            entry["model"] = spec.http.model;
            entry["api_key_env"] = spec.http.api_key_env;
            entry["temperature"] = spec.http.temperature;
            entry["max_tokens"] = spec.http.max_tokens;
            entry["timeout_ms"] = spec.http.timeout_ms;
            entry["max_retries"] = spec.http.max_retries;
            entry["backoff_initial_ms"] = spec.http.backoff_initial_ms;
        }
        doc["backends"][name] = entry;
    }
    doc["thinker"] = cfg.thinker;
    doc["answerer"] = cfg.answerer;
    doc["weights"] = {{"lambda_fmt", cfg.weights.lambda_fmt},
                      {"lambda_utility", cfg.weights.lambda_utility}};
    doc["gamma"] = cfg.gamma;
    doc["hack_rules"] = {{"patterns", cfg.hack_rules.patterns},
                         {"check_tail_declaration", cfg.hack_rules.check_tail_declaration}};
    doc["ratios"] = cfg.ratios;
    doc["tokenizer"] = {
        {"kind", cfg.tokenizer.kind == TokenizerKind::reference ? "reference"
                                                                : "backend_reported"},
        {"identifier", cfg.tokenizer.identifier}};
    doc["max_concurrency"] = cfg.max_concurrency;
    doc["dataset"] = cfg.dataset;
    doc["thinker_max_tokens"] = cfg.thinker_max_tokens;
    doc["answer_template"] =
        cfg.answer_template.empty() ? default_answer_template() : cfg.answer_template;
    doc["serve"] = {{"host", cfg.serve_host}, {"port", cfg.serve_port}};
    doc["seed"] = cfg.seed;
    return doc.dump();
}

std::unique_ptr<ChatBackend> make_backend(const RunConfig &cfg, const std::string &name,
                                          int max_output_tokens) {
    const auto it = cfg.backends.find(name);
    if (it == cfg.backends.end()) {
        raise(ErrorCode::config_error, "no backend named '" + name + "' in config");
    }
    const BackendSpec &spec = it->second;
    if (spec.kind == "mock") {
        return std::make_unique<MockBackend>(MockBackend::from_jsonl(spec.script));
    }
    HttpBackendConfig http = spec.http;
    if (max_output_tokens > 0) {
        http.max_tokens = max_output_tokens;
    }
    return std::make_unique<HttpBackend>(std::move(http));
}

}  // namespace tracepress
