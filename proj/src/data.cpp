#include "tracepress/data.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "tracepress/error.hpp"
#include "tracepress/rng.hpp"

namespace tracepress {

namespace {

[[noreturn]] void schema_fail(size_t line, const std::string &field, const std::string &why) {
    raise(ErrorCode::schema_error,
          "line " + std::to_string(line) + ", field '" + field + "': " + why);
}

std::string file_stem(const std::string &path) {
    const size_t slash = path.find_last_of("/\\");
    const size_t start = slash == std::string::npos ? 0 : slash + 1;
    const size_t dot = path.find_last_of('.');
    const size_t end = (dot == std::string::npos || dot <= start) ? path.size() : dot;
    return path.substr(start, end - start);
}

CompressionSample parse_sample(const nlohmann::json &doc, size_t line) {
    if (!doc.is_object()) {
        schema_fail(line, "(root)", "expected a JSON object");
    }
    CompressionSample sample;

    if (!doc.contains("id") || !doc["id"].is_string()) {
        schema_fail(line, "id", "required string");
    }
    sample.id = doc["id"].get<std::string>();
    if (sample.id.empty()) {
        schema_fail(line, "id", "must be non-empty");
    }

    if (!doc.contains("question") || !doc["question"].is_string()) {
        schema_fail(line, "question", "required string");
    }
    sample.question = doc["question"].get<std::string>();
    if (sample.question.empty()) {
        schema_fail(line, "question", "must be non-empty");
    }

    if (!doc.contains("context") || !doc["context"].is_array()) {
        schema_fail(line, "context", "required array of {title, text}");
    }
    for (const auto &entry : doc["context"]) {
        if (!entry.is_object() || !entry.contains("title") || !entry["title"].is_string() ||
            !entry.contains("text") || !entry["text"].is_string()) {
            schema_fail(line, "context", "each entry needs string fields 'title' and 'text'");
        }
        sample.documents.push_back(
            Document{entry["title"].get<std::string>(), entry["text"].get<std::string>()});
    }

    if (!doc.contains("answers") || !doc["answers"].is_array() || doc["answers"].empty()) {
        schema_fail(line, "answers", "required non-empty array of strings");
    }
    for (const auto &answer : doc["answers"]) {
        if (!answer.is_string()) {
            schema_fail(line, "answers", "entries must be strings");
        }
        sample.golds.push_back(answer.get<std::string>());
    }
    return sample;
}

}  // namespace

Dataset load_jsonl(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::file_not_found, "dataset not found: " + path);
    }
    Dataset ds;
    ds.name = file_stem(path);

    std::unordered_set<std::string> seen_ids;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            schema_fail(lineno, "(root)", "invalid JSON");
        }
        CompressionSample sample = parse_sample(doc, lineno);
        if (!seen_ids.insert(sample.id).second) {
            raise(ErrorCode::duplicate_id,
                  "line " + std::to_string(lineno) + ": duplicate id '" + sample.id + "'");
        }
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

void save_jsonl(const Dataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::io_error, "cannot open for writing: " + path);
    }
    for (const auto &sample : ds.samples) {
        nlohmann::ordered_json doc;
        doc["id"] = sample.id;
        doc["question"] = sample.question;
        doc["context"] = nlohmann::ordered_json::array();
        for (const auto &d : sample.documents) {
            doc["context"].push_back({{"title", d.title}, {"text", d.text}});
        }
        doc["answers"] = sample.golds;
        out << doc.dump() << "\n";
    }
    if (!out) {
        raise(ErrorCode::io_error, "write failed: " + path);
    }
}

DataStats stats(const Dataset &ds, const TokenizerSpec &tok) {
    (void)tok;  // both kinds count local text with the reference rule
    if (ds.samples.empty()) {
        raise(ErrorCode::empty_dataset, "stats: dataset '" + ds.name + "' is empty");
    }
    DataStats out;
    out.n_samples = ds.samples.size();
    out.min_tokens = SIZE_MAX;
    double sum = 0.0;
    for (const auto &sample : ds.samples) {
        const size_t tokens = concat_context(sample.documents).tokens;
        sum += static_cast<double>(tokens);
        out.min_tokens = std::min(out.min_tokens, tokens);
        out.max_tokens = std::max(out.max_tokens, tokens);
    }
    out.avg_tokens = sum / static_cast<double>(out.n_samples);
    return out;
}

Dataset subsample(const Dataset &ds, size_t n, uint64_t seed) {
    if (n < 1 || n > ds.samples.size()) {
        raise(ErrorCode::sample_too_large,
              "subsample: n=" + std::to_string(n) + " outside [1, " +
                  std::to_string(ds.samples.size()) + "]");
    }
    std::vector<size_t> indices(ds.samples.size());
    for (size_t i = 0; i < indices.size(); ++i) {
        indices[i] = i;
    }
    Rng rng(seed);
    // Partial Fisher-Yates: the first n slots end up holding the sample.
    for (size_t i = 0; i < n; ++i) {
        const size_t j = i + rng.uniform_below(indices.size() - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(n);
    std::sort(indices.begin(), indices.end());

    Dataset out;
    out.name = ds.name;
    out.samples.reserve(n);
    for (size_t idx : indices) {
        out.samples.push_back(ds.samples[idx]);
    }
    return out;
}

}  // namespace tracepress
