#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tracepress {

struct ChatMessage {
    std::string role;
    std::string content;
};

// One completed chat call. token counts are backend-reported usage figures;
// they are absent when the transport did not supply them.
struct ChatResult {
    std::string text;
    std::optional<size_t> prompt_tokens;
    std::optional<size_t> completion_tokens;
    double latency_ms = 0.0;
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatResult chat(const std::vector<ChatMessage> &messages) = 0;
    virtual std::string describe() const = 0;
};

// Stable 64-bit digest of a message list (FNV-1a over role/content with
// field separators), rendered as 16 lowercase hex digits. Scripts key
// replies on this digest so a script only matches the exact prompt it was
// recorded for.
std::string message_digest(const std::vector<ChatMessage> &messages);

// A scripted reply: either keyed to a specific message digest or a
// sequential catch-all (key absent).
struct MockReply {
    std::optional<std::string> key;
    std::string text;
};

// Deterministic in-process backend. Keyed replies are matched by digest;
// unkeyed replies are consumed in file order by requests that match no key.
// Every request is captured verbatim for later inspection.
class MockBackend : public ChatBackend {
  public:
    explicit MockBackend(std::vector<MockReply> script);

    // Parses a JSONL script, one object per line: {"key": <hex or null>, "text": ...}.
    static MockBackend from_jsonl(const std::string &path);

    ChatResult chat(const std::vector<ChatMessage> &messages) override;
    std::string describe() const override;

    const std::vector<std::vector<ChatMessage>> &requests() const { return requests_; }
    size_t replies_served() const { return served_; }

  private:
    std::vector<MockReply> script_;
    std::vector<std::vector<ChatMessage>> requests_;
    size_t next_unkeyed_ = 0;
    size_t served_ = 0;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. "http://localhost:8000"
    std::string model;
    std::string api_key_env;  // env var holding the bearer token; empty = no auth
    double temperature = 0.0;
    int max_tokens = 2048;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_initial_ms = 250;
};

// OpenAI-style /v1/chat/completions client. Transport failures and
// 429/5xx responses are retried with exponential backoff; other HTTP
// errors and malformed bodies fail immediately.
class HttpBackend : public ChatBackend {
  public:
    explicit HttpBackend(HttpBackendConfig config);

    ChatResult chat(const std::vector<ChatMessage> &messages) override;
    std::string describe() const override;

  private:
    HttpBackendConfig config_;
    std::string api_key_;
};

}  // namespace tracepress
