#include "tracepress/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tracepress/error.hpp"
#include "tracepress/trace.hpp"

namespace tracepress {

namespace {

// Field separators keep ("ab","c") and ("a","bc") from colliding.
constexpr uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001B3ULL;

uint64_t fnv1a_extend(uint64_t h, const std::string &s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::mutex g_mock_mutex;

}  // namespace

std::string message_digest(const std::vector<ChatMessage> &messages) {
    uint64_t h = kFnvOffset;
    for (const auto &m : messages) {
        h = fnv1a_extend(h, m.role);
        h ^= 0x1E;
        h *= kFnvPrime;
        h = fnv1a_extend(h, m.content);
        h ^= 0x1F;
        h *= kFnvPrime;
    }
    static const char *hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

MockBackend::MockBackend(std::vector<MockReply> script) : script_(std::move(script)) {}

MockBackend MockBackend::from_jsonl(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::file_not_found, "mock script not found: " + path);
    }
    std::vector<MockReply> script;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("text") ||
            !doc["text"].is_string()) {
            raise(ErrorCode::schema_error,
                  "mock script " + path + " line " + std::to_string(lineno) +
                      ": expected {\"key\": <hex or null>, \"text\": <string>}");
        }
        MockReply reply;
        reply.text = doc["text"].get<std::string>();
        if (doc.contains("key") && !doc["key"].is_null()) {
            if (!doc["key"].is_string()) {
                raise(ErrorCode::schema_error, "mock script " + path + " line " +
                                                   std::to_string(lineno) +
                                                   ": key must be a hex string or null");
            }
            reply.key = doc["key"].get<std::string>();
        }
        script.push_back(std::move(reply));
    }
    return MockBackend(std::move(script));
}

ChatResult MockBackend::chat(const std::vector<ChatMessage> &messages) {
    std::lock_guard<std::mutex> lock(g_mock_mutex);
    requests_.push_back(messages);

    const std::string digest = message_digest(messages);
    const MockReply *match = nullptr;
    for (const auto &reply : script_) {
        if (reply.key && *reply.key == digest) {
            match = &reply;
            break;
        }
    }
    if (!match) {
        while (next_unkeyed_ < script_.size() && script_[next_unkeyed_].key) {
            ++next_unkeyed_;
        }
        if (next_unkeyed_ < script_.size()) {
            match = &script_[next_unkeyed_];
            ++next_unkeyed_;
        }
    }
    if (!match) {
        // A script that carries catch-all replies ran dry; a purely keyed
        // script simply never covered this prompt.
        bool has_unkeyed = false;
        for (const auto &reply : script_) {
            if (!reply.key) {
                has_unkeyed = true;
                break;
            }
        }
        if (has_unkeyed) {
            raise(ErrorCode::script_exhausted,
                  "mock script has no reply left for digest " + digest);
        }
        raise(ErrorCode::unscripted_request, "mock request not scripted: digest " + digest);
    }
    ++served_;

    ChatResult result;
    result.text = match->text;
    size_t prompt_tokens = 0;
    for (const auto &m : messages) {
        prompt_tokens += count_tokens(m.content);
    }
    result.prompt_tokens = prompt_tokens;
    result.completion_tokens = count_tokens(match->text);
    result.latency_ms = 0.0;
    return result;
}

std::string MockBackend::describe() const {
    return "mock(" + std::to_string(script_.size()) + " replies)";
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.rfind("https://", 0) == 0) {
        raise(ErrorCode::config_error, "https endpoints are not supported; use http");
    }
    if (!config_.api_key_env.empty()) {
        const char *key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            raise(ErrorCode::auth_missing,
                  "backend requires auth but " + config_.api_key_env + " is not set");
        }
        api_key_ = key;
    }
}

ChatResult HttpBackend::chat(const std::vector<ChatMessage> &messages) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_tokens;
    body["messages"] = nlohmann::json::array();
    for (const auto &m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    const std::string payload = body.dump();

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    int last_status = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.backoff_initial_ms << (attempt - 1)));
        }
        const auto t0 = std::chrono::steady_clock::now();
        auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
        const auto t1 = std::chrono::steady_clock::now();

        if (!res) {
            last_status = 0;
            continue;  // transport error: retry
        }
        last_status = res->status;
        if (res->status == 429 || res->status >= 500) {
            continue;  // transient: retry
        }
        if (res->status != 200) {
            raise(ErrorCode::http_status,
                  "chat endpoint returned status " + std::to_string(res->status));
        }

        nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
            doc["choices"].empty() || !doc["choices"][0].contains("message") ||
            !doc["choices"][0]["message"].contains("content") ||
            !doc["choices"][0]["message"]["content"].is_string()) {
            raise(ErrorCode::malformed_response, "chat endpoint returned an unexpected body");
        }
        ChatResult result;
        result.text = doc["choices"][0]["message"]["content"].get<std::string>();
        if (doc.contains("usage") && doc["usage"].is_object()) {
            const auto &usage = doc["usage"];
            if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number_unsigned()) {
                result.prompt_tokens = usage["prompt_tokens"].get<size_t>();
            }
            if (usage.contains("completion_tokens") &&
                usage["completion_tokens"].is_number_unsigned()) {
                result.completion_tokens = usage["completion_tokens"].get<size_t>();
            }
        }
        result.latency_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                .count();
        return result;
    }
    if (last_status != 0) {
        raise(ErrorCode::http_status, "chat endpoint kept failing with status " +
                                          std::to_string(last_status) + " after " +
                                          std::to_string(config_.max_retries + 1) + " attempts");
    }
    raise(ErrorCode::timeout, "chat endpoint unreachable after " +
                                  std::to_string(config_.max_retries + 1) + " attempts");
}

std::string HttpBackend::describe() const {
    return "http(" + config_.base_url + ", model=" + config_.model + ")";
}

}  // namespace tracepress
