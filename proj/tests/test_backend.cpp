#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tracepress/backend.hpp"
#include "tracepress/error.hpp"

using namespace tracepress;

namespace {

std::string write_temp(const std::string &name, const std::string &content) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    return path;
}

}  // namespace

TEST_CASE("message digest is stable and sensitive to every field") {
    const std::vector<ChatMessage> msgs = {{"user", "hello"}};
    const std::string d = message_digest(msgs);
    CHECK(d.size() == 16);
    for (char c : d) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
    CHECK(message_digest(msgs) == d);

    CHECK(message_digest({{"user", "hello!"}}) != d);
    CHECK(message_digest({{"system", "hello"}}) != d);
    CHECK(message_digest({{"user", "hello"}, {"user", ""}}) != d);
    // Role/content boundary must be part of the hash, not just the bytes.
    CHECK(message_digest({{"userh", "ello"}}) != d);
    CHECK(message_digest({}) != d);
}

TEST_CASE("mock backend: keyed replies match by digest, repeatably") {
    const std::vector<ChatMessage> req_a = {{"user", "question a"}};
    const std::vector<ChatMessage> req_b = {{"user", "question b"}};
    std::vector<MockReply> script;
    script.push_back({message_digest(req_a), "reply a"});
    script.push_back({message_digest(req_b), "reply b"});
    MockBackend mock(std::move(script));

    CHECK(mock.chat(req_b).text == "reply b");
    CHECK(mock.chat(req_a).text == "reply a");
    // Keyed replies are idempotent: the same prompt can be asked again.
    CHECK(mock.chat(req_a).text == "reply a");
    CHECK(mock.replies_served() == 3);

    REQUIRE(mock.requests().size() == 3);
    CHECK(mock.requests()[0][0].content == "question b");
    CHECK(mock.requests()[2][0].content == "question a");

    CHECK_THROWS_WITH_AS(static_cast<void>(mock.chat({{"user", "never scripted"}})),
                         doctest::Contains("not scripted"), Error);
}

TEST_CASE("mock backend: sequence mode consumes unkeyed replies in order") {
    MockBackend mock({{std::nullopt, "first"}, {std::nullopt, "second"}});
    CHECK(mock.chat({{"user", "x"}}).text == "first");
    CHECK(mock.chat({{"user", "y"}}).text == "second");
    CHECK_THROWS_WITH_AS(static_cast<void>(mock.chat({{"user", "z"}})),
                         doctest::Contains("no reply left"), Error);
}

TEST_CASE("mock backend: usage is reported via the reference token count") {
    MockBackend mock({{std::nullopt, "three token reply"}});
    const ChatResult r = mock.chat({{"user", "two tokens"}});
    REQUIRE(r.completion_tokens.has_value());
    CHECK(*r.completion_tokens == 3);
    REQUIRE(r.prompt_tokens.has_value());
    CHECK(*r.prompt_tokens == 2);
    CHECK(r.latency_ms == 0.0);
}

TEST_CASE("mock backend: JSONL script parsing") {
    const std::string path = write_temp(
        "tracepress_mock_ok.jsonl",
        "{\"key\": null, \"text\": \"alpha\"}\n{\"key\": \"00000000deadbeef\", \"text\": \"beta\"}\n");
    MockBackend mock = MockBackend::from_jsonl(path);
    CHECK(mock.chat({{"user", "anything"}}).text == "alpha");
    std::remove(path.c_str());
}

TEST_CASE("mock backend: script file errors") {
    CHECK_THROWS_AS(MockBackend::from_jsonl("/tmp/tracepress_no_such_script.jsonl"), Error);

    const std::string bad_json =
        write_temp("tracepress_mock_bad.jsonl", "{\"key\": null, \"text\": \"ok\"}\nnot json\n");
    CHECK_THROWS_WITH_AS(MockBackend::from_jsonl(bad_json), doctest::Contains("line 2"), Error);
    std::remove(bad_json.c_str());

    const std::string missing_field =
        write_temp("tracepress_mock_field.jsonl", "{\"key\": null}\n");
    CHECK_THROWS_AS(MockBackend::from_jsonl(missing_field), Error);
    std::remove(missing_field.c_str());
}

TEST_CASE("http backend: construction-time validation") {
    HttpBackendConfig cfg;
    cfg.base_url = "https://example.invalid";
    cfg.model = "m";
    CHECK_THROWS_WITH_AS(HttpBackend{cfg}, doctest::Contains("https"), Error);

    cfg.base_url = "http://127.0.0.1:1";
    cfg.api_key_env = "TRACEPRESS_TEST_KEY_THAT_IS_UNSET";
    CHECK_THROWS_AS(HttpBackend{cfg}, Error);
}

TEST_CASE("http backend: connection failure surfaces after retries") {
    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";  // discard port; nothing listens
    cfg.model = "m";
    cfg.timeout_ms = 200;
    cfg.max_retries = 1;
    cfg.backoff_initial_ms = 1;
    HttpBackend backend(cfg);
    CHECK_THROWS_AS(static_cast<void>(backend.chat({{"user", "hi"}})), Error);
}

TEST_CASE("describe names the transport") {
    MockBackend mock({{std::nullopt, "x"}});
    CHECK(mock.describe().find("mock") != std::string::npos);

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";
    cfg.model = "demo-model";
    HttpBackend backend(cfg);
    CHECK(backend.describe().find("demo-model") != std::string::npos);
}
