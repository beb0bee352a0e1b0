// Regenerates the keyed mock scripts fixtures/mock_thinker.jsonl and
// fixtures/mock_answerer.jsonl from fixtures/smoke_qa.jsonl. Replies are
// keyed on the message digest of the exact prompt the pipeline will send,
// so scripted runs are order-independent and safe under concurrency.
//
// Reply scheme, per sample index i and ratio r:
//   i % 7 == 3  -> no think block (exercises the format-failure path)
//   i % 7 == 5  -> within-budget trace that ends by declaring the answer
//                  (exercises the anti-hack gate)
//   i % 5 == 2  -> trace ~15% over budget (exercises the decay zone)
//   otherwise   -> context prefix within budget
// The answer backend replies with the gold whenever the visible (truncated)
// trace still contains it verbatim, otherwise with a fixed miss phrase.

#include <fstream>
#include <iostream>
#include <set>

#include "json.hpp"
#include "tracepress/backend.hpp"
#include "tracepress/data.hpp"
#include "tracepress/pipeline.hpp"
#include "tracepress/trace.hpp"

using namespace tracepress;

namespace {

void write_line(std::ofstream &out, const std::string &key, const std::string &text) {
    nlohmann::ordered_json line;
    line["key"] = key;
    line["text"] = text;
    out << line.dump() << "\n";
}

}  // namespace

int main() {
    const Dataset ds = load_jsonl("fixtures/smoke_qa.jsonl");
    std::ofstream thinker_out("fixtures/mock_thinker.jsonl", std::ios::binary);
    std::ofstream answerer_out("fixtures/mock_answerer.jsonl", std::ios::binary);
    std::set<std::string> seen_answer_keys;

    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto &sample = ds.samples[i];
        for (int ratio : {4, 8}) {
            const ContextText ctx = concat_context(sample.documents);
            const BudgetSpec budget = compute_budget(ctx.tokens, ratio);
            const std::string prompt = build_thinker_prompt(sample.question, ctx.text, budget);
            const std::string thinker_key = message_digest({{"user", prompt}});

            std::string reply;
            if (i % 7 == 3) {
                reply = "I am unable to produce a trace for this request.";
            } else if (i % 7 == 5) {
                const std::string body =
                    truncate_to_budget(ctx.text, std::max<size_t>(budget.budget, 8) - 7);
                reply = "<think>\n" + body + " The answer is " + sample.golds[0] +
                        ".\n</think>";
            } else if (i % 5 == 2) {
                const size_t overlong = budget.budget + std::max<size_t>(budget.budget / 7, 2);
                reply = "<think>\n" + truncate_to_budget(ctx.text, overlong) + "\n</think>";
            } else {
                reply = "<think>\n" + truncate_to_budget(ctx.text, budget.budget) + "\n</think>";
            }
            write_line(thinker_out, thinker_key, reply);

            ThinkTrace trace;
            try {
                trace = extract_think(reply);
            } catch (const std::exception &) {
                continue;  // format-failure samples never reach the answerer
            }
            const std::string visible = truncate_to_budget(trace.raw_text, budget.budget);
            const std::string answer_prompt = build_answer_prompt(sample.question, visible);
            const std::string answer_key = message_digest({{"user", answer_prompt}});
            if (!seen_answer_keys.insert(answer_key).second) {
                continue;
            }
            const bool findable = visible.find(sample.golds[0]) != std::string::npos;
            write_line(answerer_out, answer_key,
                       findable ? sample.golds[0] : "not stated in the context");
        }
    }
    std::cout << "wrote fixtures/mock_thinker.jsonl and fixtures/mock_answerer.jsonl\n";
    return 0;
}
