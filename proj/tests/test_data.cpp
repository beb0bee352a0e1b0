#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tracepress/data.hpp"
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

const char kValidJsonl[] =
    "{\"id\": \"s1\", \"question\": \"Who?\", \"context\": [{\"title\": \"T\", \"text\": "
    "\"Mira Voss did.\"}], \"answers\": [\"Mira Voss\"]}\n"
    "\n"
    "{\"id\": \"s2\", \"question\": \"When?\", \"context\": [{\"title\": \"U\", \"text\": "
    "\"In 1901.\"}, {\"title\": \"V\", \"text\": \"Or 1902.\"}], \"answers\": [\"1901\", "
    "\"1902\"]}\n";

}  // namespace

TEST_CASE("load_jsonl parses the canonical schema and skips blank lines") {
    const std::string path = write_temp("tracepress_data_ok.jsonl", kValidJsonl);
    const Dataset ds = load_jsonl(path);
    CHECK(ds.name == "tracepress_data_ok");
    REQUIRE(ds.samples.size() == 2);
    CHECK(ds.samples[0].id == "s1");
    CHECK(ds.samples[0].question == "Who?");
    REQUIRE(ds.samples[0].documents.size() == 1);
    CHECK(ds.samples[0].documents[0].title == "T");
    CHECK(ds.samples[0].documents[0].text == "Mira Voss did.");
    CHECK(ds.samples[0].golds == std::vector<std::string>{"Mira Voss"});
    REQUIRE(ds.samples[1].documents.size() == 2);
    CHECK(ds.samples[1].golds.size() == 2);
    std::remove(path.c_str());
}

TEST_CASE("load_jsonl: errors name the line and field") {
    const std::string missing = write_temp(
        "tracepress_data_missing.jsonl",
        "{\"id\": \"s1\", \"question\": \"Who?\", \"context\": [], \"answers\": [\"x\"]}\n"
        "{\"id\": \"s2\", \"question\": \"When?\", \"context\": []}\n");
    CHECK_THROWS_WITH_AS(load_jsonl(missing), doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(load_jsonl(missing), doctest::Contains("answers"), Error);
    std::remove(missing.c_str());

    const std::string bad_json =
        write_temp("tracepress_data_badjson.jsonl", "{\"id\": \"s1\"\n");
    CHECK_THROWS_WITH_AS(load_jsonl(bad_json), doctest::Contains("line 1"), Error);
    std::remove(bad_json.c_str());

    const std::string dup = write_temp(
        "tracepress_data_dup.jsonl",
        "{\"id\": \"s1\", \"question\": \"a\", \"context\": [], \"answers\": [\"x\"]}\n"
        "{\"id\": \"s1\", \"question\": \"b\", \"context\": [], \"answers\": [\"y\"]}\n");
    CHECK_THROWS_AS(load_jsonl(dup), Error);
    std::remove(dup.c_str());

    const std::string bad_answer_type = write_temp(
        "tracepress_data_badtype.jsonl",
        "{\"id\": \"s1\", \"question\": \"a\", \"context\": [], \"answers\": [7]}\n");
    CHECK_THROWS_AS(load_jsonl(bad_answer_type), Error);
    std::remove(bad_answer_type.c_str());

    CHECK_THROWS_AS(load_jsonl("/tmp/tracepress_no_such_data.jsonl"), Error);
}

TEST_CASE("save_jsonl round-trips through load_jsonl") {
    const std::string src = write_temp("tracepress_data_rt.jsonl", kValidJsonl);
    const Dataset ds = load_jsonl(src);
    const std::string dst = "/tmp/tracepress_data_rt_saved.jsonl";
    save_jsonl(ds, dst);

    const Dataset again = load_jsonl(dst);
    REQUIRE(again.samples.size() == ds.samples.size());
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(again.samples[i].id == ds.samples[i].id);
        CHECK(again.samples[i].question == ds.samples[i].question);
        CHECK(again.samples[i].golds == ds.samples[i].golds);
        REQUIRE(again.samples[i].documents.size() == ds.samples[i].documents.size());
        for (size_t d = 0; d < ds.samples[i].documents.size(); ++d) {
            CHECK(again.samples[i].documents[d].title == ds.samples[i].documents[d].title);
            CHECK(again.samples[i].documents[d].text == ds.samples[i].documents[d].text);
        }
    }

    std::ifstream in(dst, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(!content.empty());
    CHECK(content.back() == '\n');
    std::remove(src.c_str());
    std::remove(dst.c_str());
}

TEST_CASE("stats: hand-counted context lengths") {
    Dataset ds;
    ds.name = "hand";
    CompressionSample a;
    a.id = "a";
    // "Document: T.\none two three four five six" -> 4 + 6 tokens.
    a.documents = {{"T", "one two three four five six"}};
    CompressionSample b;
    b.id = "b";
    b.documents = {{"T", "one two three four five six seven eight nine ten eleven twelve "
                         "thirteen fourteen fifteen sixteen seventeen eighteen nineteen "
                         "twenty twentyone twentytwo twentythree twentyfour twentyfive "
                         "twentysix"}};
    ds.samples = {a, b};

    const DataStats st = stats(ds, TokenizerSpec{});
    CHECK(st.n_samples == 2);
    CHECK(st.min_tokens == 10);
    CHECK(st.max_tokens == 30);
    CHECK(st.avg_tokens == doctest::Approx(20.0));

    // Order cannot matter.
    std::swap(ds.samples[0], ds.samples[1]);
    const DataStats swapped = stats(ds, TokenizerSpec{});
    CHECK(swapped.min_tokens == st.min_tokens);
    CHECK(swapped.max_tokens == st.max_tokens);
    CHECK(swapped.avg_tokens == doctest::Approx(st.avg_tokens));

    // Backend-reported specs fall back to reference counts for local text.
    TokenizerSpec backend;
    backend.kind = TokenizerKind::backend_reported;
    const DataStats via_backend = stats(ds, backend);
    CHECK(via_backend.avg_tokens == doctest::Approx(st.avg_tokens));

    Dataset single;
    single.samples = {a};
    const DataStats one = stats(single, TokenizerSpec{});
    CHECK(one.min_tokens == one.max_tokens);
    CHECK(one.avg_tokens == doctest::Approx(static_cast<double>(one.min_tokens)));

    CHECK_THROWS_AS(stats(Dataset{}, TokenizerSpec{}), Error);
}

TEST_CASE("subsample: deterministic, order-preserving, seed-sensitive") {
    Dataset ds;
    ds.name = "pool";
    for (int i = 0; i < 12; ++i) {
        CompressionSample s;
        s.id = "s" + std::to_string(i + 10);  // s10..s21, lexicographic == insertion order
        ds.samples.push_back(s);
    }

    const Dataset a = subsample(ds, 5, 7);
    const Dataset b = subsample(ds, 5, 7);
    REQUIRE(a.samples.size() == 5);
    for (size_t i = 0; i < 5; ++i) CHECK(a.samples[i].id == b.samples[i].id);

    // Original order is preserved within the selection.
    for (size_t i = 1; i < a.samples.size(); ++i) {
        CHECK(a.samples[i - 1].id < a.samples[i].id);
    }

    const Dataset c = subsample(ds, 5, 8);
    bool differs = false;
    for (size_t i = 0; i < 5; ++i) differs = differs || (a.samples[i].id != c.samples[i].id);
    CHECK(differs);

    const Dataset whole = subsample(ds, 12, 1);
    REQUIRE(whole.samples.size() == 12);
    for (size_t i = 0; i < 12; ++i) CHECK(whole.samples[i].id == ds.samples[i].id);

    CHECK_THROWS_AS(subsample(ds, 0, 1), Error);
    CHECK_THROWS_AS(subsample(ds, 13, 1), Error);
}
